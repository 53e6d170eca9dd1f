#pragma once

#include <span>

#include "eivcheck/errors.hpp"

namespace eivcheck {

enum class KernelFamily { quartic };

/// Compactly supported second-order symmetric kernel. The quartic
/// K(u) = (15/16)(1-u^2)^2 on [-1,1] is the only built-in family;
/// the same function serves as the calibration kernel M.
struct KernelSpec {
    KernelFamily family = KernelFamily::quartic;
    double support_radius = 1.0;
};

enum class BandwidthRegime { standard, small_lambda, zheng };

/// Constants and rate regime for the two smoothing bandwidths h and v_N.
struct BandwidthPlan {
    double c1 = 1.6;
    double c2 = 1.6;
    BandwidthRegime regime = BandwidthRegime::standard;
};

struct ResolvedBandwidths {
    double h;
    double v_N;
};

double kernel_eval(const KernelSpec& spec, double u);

/// Integral of K^2 over the support (5/7 for the quartic).
double kernel_square_integral(const KernelSpec& spec);

/// Self-convolution overlap constant: integral over v of
/// (integral of M(u)M(u+v) du)^2, computed by quadrature.
double kernel_conv_square_integral(const KernelSpec& spec);

/// h^{-d} prod_k K(z_k / h) for a point z in R^d.
double product_kernel_eval(const KernelSpec& spec, std::span<const double> z, double h);

/// Squared product kernel with the h^{-d} scaling applied once:
/// h^{-d} prod_k K^2(z_k / h). This is the factor used by the
/// variance plug-ins.
double product_kernel_square_eval(const KernelSpec& spec, std::span<const double> z, double h);

/// Nadaraya-Watson estimate at `query`. Throws EmptyWindow when no
/// abscissa lies within the kernel support of the query point.
double nw_regression(std::span<const double> abscissae, std::span<const double> ordinates,
                     double v, double query, const KernelSpec& spec = {});

/// Same, but falls back to the ordinate of the nearest abscissa on an
/// empty window.
double nw_regression_or_nearest(std::span<const double> abscissae,
                                std::span<const double> ordinates, double v, double query,
                                const KernelSpec& spec = {});

/// Bandwidths per regime:
///   standard:      h = c1 n^{-1/(4+q)},   v_N = c2 (N/2)^{-2/5}
///   small_lambda:  h = c2 n^{-1/(2+q)},   v_N = c1 (N/2)^{-1/3}
///   zheng:         h = c1 n^{-1/(4+p)},   v_N = c1 (N/2)^{-2/5}
/// `full_sample_v` switches the standard v_N to c2 N^{-2/5} (used when
/// the calibration estimator is built from all N validation rows).
ResolvedBandwidths resolve_bandwidths(const BandwidthPlan& plan, std::size_t n, std::size_t N,
                                      std::size_t q_hat, std::size_t p,
                                      bool full_sample_v = false);

}  // namespace eivcheck
