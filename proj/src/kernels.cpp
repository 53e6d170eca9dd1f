#include "eivcheck/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace eivcheck {

double kernel_eval(const KernelSpec& spec, double u) {
    switch (spec.family) {
        case KernelFamily::quartic: {
            if (std::abs(u) > spec.support_radius) return 0.0;
            const double t = 1.0 - u * u;
            return (15.0 / 16.0) * t * t;
        }
    }
    return 0.0;
}

double kernel_square_integral(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::quartic:
            return 5.0 / 7.0;
    }
    return 0.0;
}

double kernel_conv_square_integral(const KernelSpec& spec) {
    // integral over v of (integral of M(u)M(u+v) du)^2.
    // The inner convolution is supported on |v| <= 2R; composite Simpson
    // on both layers is far below 1e-10 for the smooth quartic.
    const double radius = spec.support_radius;
    const int m = 2000;  // even

    auto conv = [&](double v) {
        const double lo = -radius, hi = radius;
        const double step = (hi - lo) / m;
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double u = lo + i * step;
            const double fu = kernel_eval(spec, u) * kernel_eval(spec, u + v);
            const double weight = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += weight * fu;
        }
        return acc * step / 3.0;
    };

    const double lo = -2.0 * radius, hi = 2.0 * radius;
    const double step = (hi - lo) / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double v = lo + i * step;
        const double c = conv(v);
        const double weight = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += weight * c * c;
    }
    return acc * step / 3.0;
}

double product_kernel_eval(const KernelSpec& spec, std::span<const double> z, double h) {
    if (z.empty()) throw std::invalid_argument("product_kernel_eval: dimension must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("product_kernel_eval: bandwidth must be positive");
    double prod = 1.0;
    for (double zk : z) {
        prod *= kernel_eval(spec, zk / h);
        if (prod == 0.0) return 0.0;
    }
    return prod / std::pow(h, static_cast<double>(z.size()));
}

double product_kernel_square_eval(const KernelSpec& spec, std::span<const double> z, double h) {
    if (z.empty()) throw std::invalid_argument("product_kernel_square_eval: dimension must be >= 1");
    if (!(h > 0.0))
        throw std::invalid_argument("product_kernel_square_eval: bandwidth must be positive");
    double prod = 1.0;
    for (double zk : z) {
        const double k = kernel_eval(spec, zk / h);
        prod *= k * k;
        if (prod == 0.0) return 0.0;
    }
    return prod / std::pow(h, static_cast<double>(z.size()));
}

double nw_regression(std::span<const double> abscissae, std::span<const double> ordinates,
                     double v, double query, const KernelSpec& spec) {
    if (abscissae.size() != ordinates.size() || abscissae.empty())
        throw std::invalid_argument("nw_regression: mismatched or empty inputs");
    if (!(v > 0.0)) throw std::invalid_argument("nw_regression: bandwidth must be positive");
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < abscissae.size(); ++s) {
        const double weight = kernel_eval(spec, (query - abscissae[s]) / v);
        num += weight * ordinates[s];
        den += weight;
    }
    if (den <= 0.0) throw EmptyWindow("nw_regression: no abscissa within the kernel window");
    return num / den;
}

double nw_regression_or_nearest(std::span<const double> abscissae,
                                std::span<const double> ordinates, double v, double query,
                                const KernelSpec& spec) {
    try {
        return nw_regression(abscissae, ordinates, v, query, spec);
    } catch (const EmptyWindow&) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_s = 0;
        for (std::size_t s = 0; s < abscissae.size(); ++s) {
            const double d = std::abs(query - abscissae[s]);
            if (d < best) {
                best = d;
                best_s = s;
            }
        }
        return ordinates[best_s];
    }
}

ResolvedBandwidths resolve_bandwidths(const BandwidthPlan& plan, std::size_t n, std::size_t N,
                                      std::size_t q_hat, std::size_t p, bool full_sample_v) {
    if (n < 2 || N < 2) throw std::invalid_argument("resolve_bandwidths: n and N must be >= 2");
    if (q_hat < 1 || q_hat > p)
        throw std::invalid_argument("resolve_bandwidths: q_hat must lie in [1, p]");
    const double dn = static_cast<double>(n);
    const double half_N = static_cast<double>(N) / 2.0;
    switch (plan.regime) {
        case BandwidthRegime::standard: {
            const double h = plan.c1 * std::pow(dn, -1.0 / (4.0 + static_cast<double>(q_hat)));
            const double v = full_sample_v
                                 ? plan.c2 * std::pow(static_cast<double>(N), -2.0 / 5.0)
                                 : plan.c2 * std::pow(half_N, -2.0 / 5.0);
            return {h, v};
        }
        case BandwidthRegime::small_lambda: {
            const double h = plan.c2 * std::pow(dn, -1.0 / (2.0 + static_cast<double>(q_hat)));
            const double v = plan.c1 * std::pow(half_N, -1.0 / 3.0);
            return {h, v};
        }
        case BandwidthRegime::zheng: {
            const double h = plan.c1 * std::pow(dn, -1.0 / (4.0 + static_cast<double>(p)));
            const double v = plan.c1 * std::pow(half_N, -2.0 / 5.0);
            return {h, v};
        }
    }
    throw std::logic_error("resolve_bandwidths: unreachable");
}

}  // namespace eivcheck
