#include "eivcheck/teststat.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "eivcheck/errors.hpp"
#include "eivcheck/estimators.hpp"
#include "eivcheck/sdr.hpp"
#include "eivcheck/stats.hpp"

namespace eivcheck {

namespace {

const KernelSpec kQuartic{};

// Product kernel over the difference of two z-rows, h^{-q}-scaled.
double row_kernel(const Matrix& za, Eigen::Index i, const Matrix& zb, Eigen::Index j,
                  double h) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < za.cols(); ++k) {
        prod *= kernel_eval(kQuartic, (za(i, k) - zb(j, k)) / h);
        if (prod == 0.0) return 0.0;
    }
    return prod / std::pow(h, static_cast<double>(za.cols()));
}

// Squared product kernel with a single h^{-q} scaling, as used by the
// variance plug-ins.
double row_kernel_square(const Matrix& za, Eigen::Index i, const Matrix& zb, Eigen::Index j,
                         double h) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < za.cols(); ++k) {
        const double kv = kernel_eval(kQuartic, (za(i, k) - zb(j, k)) / h);
        prod *= kv * kv;
        if (prod == 0.0) return 0.0;
    }
    return prod / std::pow(h, static_cast<double>(za.cols()));
}

}  // namespace

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::tilde: return "tilde";
        case Regime::split_finite_lambda: return "split";
        case Regime::split_infinite_lambda: return "infinite-lambda";
        case Regime::small_lambda: return "small-lambda";
        case Regime::zheng: return "zheng";
    }
    return "?";
}

RegimeRequest regime_request_from_name(const std::string& name) {
    if (name == "auto") return RegimeRequest::auto_select;
    if (name == "tilde") return RegimeRequest::tilde;
    if (name == "split") return RegimeRequest::split;
    if (name == "small-lambda") return RegimeRequest::small_lambda;
    if (name == "infinite-lambda") return RegimeRequest::infinite_lambda;
    if (name == "zheng") return RegimeRequest::zheng;
    throw InvalidConfig("unknown regime: " + name);
}

double v_tilde(const Vector& e_hat, const Matrix& z_hat, double h) {
    const Eigen::Index n = e_hat.size();
    if (n < 2) throw std::invalid_argument("v_tilde: need n >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("v_tilde: bandwidth must be positive");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            acc += 2.0 * e_hat(i) * row_kernel(z_hat, i, z_hat, j, h) * e_hat(j);
    return acc / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double v_split(const Vector& e1, const Vector& e2, const Matrix& z_hat, double h) {
    const Eigen::Index n = e1.size();
    if (n < 2) throw std::invalid_argument("v_split: need n >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("v_split: bandwidth must be positive");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double kv = row_kernel(z_hat, i, z_hat, j, h);
            acc += kv * (e1(i) * e2(j) + e1(j) * e2(i));
        }
    return acc / (static_cast<double>(n) * static_cast<double>(n - 1));
}

TildePlugins variance_plugins_tilde(const Vector& e_hat, const Vector& eta_full,
                                    const Matrix& z_hat, const Matrix& z_tilde, double h,
                                    std::size_t q_hat) {
    const Eigen::Index n = e_hat.size();
    const Eigen::Index N = eta_full.size();
    TildePlugins out;

    const Vector e2 = e_hat.array().square();
    const Vector eta2 = eta_full.array().square();

    double t1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            t1 += 2.0 * row_kernel_square(z_hat, i, z_hat, j, h) * e2(i) * e2(j);
    out.tau1 = 2.0 * t1 / (static_cast<double>(n) * static_cast<double>(n - 1));

    double t2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index s = 0; s < N; ++s)
            t2 += row_kernel_square(z_hat, i, z_tilde, s, h) * e2(i) * eta2(s);
    out.tau2 = t2 / (static_cast<double>(n) * static_cast<double>(N));

    double t3 = 0.0;
    for (Eigen::Index s = 0; s < N; ++s)
        for (Eigen::Index t = s + 1; t < N; ++t)
            t3 += 2.0 * row_kernel_square(z_tilde, s, z_tilde, t, h) * eta2(s) * eta2(t);
    out.tau3 = 2.0 * t3 / (static_cast<double>(N) * static_cast<double>(N - 1));

    const double k0 = std::pow(kernel_eval(kQuartic, 0.0), static_cast<double>(q_hat));
    out.mu = k0 * eta2.sum() / (static_cast<double>(N) * static_cast<double>(N) * h);
    return out;
}

double variance_plugin_split(const Vector& e1, const Vector& e2, const Vector& eta_first,
                             const Vector& eta_second, const Matrix& z_hat,
                             const Matrix& z_tilde, double h, std::size_t /*q_hat*/,
                             double lambda_hat) {
    if (!(lambda_hat > 0.0))
        throw std::invalid_argument("variance_plugin_split: lambda_hat must be positive");
    const Eigen::Index n = e1.size();
    const Eigen::Index half = eta_first.size();
    const Eigen::Index N = 2 * half;

    const Vector e1sq = e1.array().square();
    const Vector e2sq = e2.array().square();
    const Vector eta_t2 = eta_first.array().square();   // rows 0..half-1 of z_tilde
    const Vector eta_s2 = eta_second.array().square();  // rows half..N-1 of z_tilde

    double term1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            term1 += row_kernel_square(z_hat, i, z_hat, j, h) * e1sq(i) * e2sq(j);
        }
    term1 *= 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));

    double term2 = 0.0;  // e_{i(1)} paired with the second-half eta
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index s = half; s < N; ++s)
            term2 += row_kernel_square(z_hat, i, z_tilde, s, h) * e1sq(i) * eta_s2(s - half);
    term2 *= 4.0 / (lambda_hat * static_cast<double>(n) * static_cast<double>(N));

    double term3 = 0.0;  // e_{i(2)} paired with the first-half eta
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index t = 0; t < half; ++t)
            term3 += row_kernel_square(z_hat, i, z_tilde, t, h) * e2sq(i) * eta_t2(t);
    term3 *= 4.0 / (lambda_hat * static_cast<double>(n) * static_cast<double>(N));

    double term4 = 0.0;
    for (Eigen::Index t = 0; t < half; ++t)
        for (Eigen::Index s = half; s < N; ++s)
            term4 += row_kernel_square(z_tilde, s, z_tilde, t, h) * eta_s2(s - half) * eta_t2(t);
    term4 *= 16.0 / (lambda_hat * lambda_hat * static_cast<double>(N) * static_cast<double>(N));

    return term1 + term2 + term3 + term4;
}

SmallLambdaPlugins small_lambda_plugins(const Vector& eta_first, const Vector& eta_second,
                                        const Matrix& z_tilde, double v_N,
                                        const Vector& beta_hat) {
    const Eigen::Index half = eta_first.size();
    const Eigen::Index N = half + eta_second.size();
    if (!(v_N > 0.0))
        throw std::invalid_argument("small_lambda_plugins: bandwidth must be positive");

    const double beta_norm = beta_hat.norm();
    double eta_sq_sum = eta_first.array().square().sum() + eta_second.array().square().sum();

    SmallLambdaPlugins out;
    out.nu = beta_norm / (v_N * static_cast<double>(N)) * kernel_square_integral(kQuartic) *
             (eta_sq_sum / static_cast<double>(N));

    // Cross-half density-weighted integral estimate of int (xi^2)^2 f^2.
    static const double conv_sq = kernel_conv_square_integral(kQuartic);
    double j_hat = 0.0;
    for (Eigen::Index t = 0; t < half; ++t)
        for (Eigen::Index s = half; s < N; ++s)
            j_hat += row_kernel(z_tilde, t, z_tilde, s, v_N) * eta_first(t) * eta_first(t) *
                     eta_second(s - half) * eta_second(s - half);
    j_hat /= static_cast<double>(half) * static_cast<double>(N - half);

    out.tau_small = 2.0 * (2.0 * beta_norm * conv_sq * j_hat);
    return out;
}

TestOutcome run_test(const PrimarySample& primary, const ValidationSample& validation,
                     const LinkFunction& link, const BandwidthPlan& plan, double alpha,
                     RegimeRequest request, CriticalConvention convention) {
    if (!(alpha > 0.0 && alpha <= 0.5))
        throw InvalidConfig("run_test: alpha must lie in (0, 0.5]");
    const Eigen::Index n = primary.n();
    const Eigen::Index p = primary.p();
    const Eigen::Index N = validation.N();
    const double lambda_hat = static_cast<double>(N) / static_cast<double>(n);

    Regime regime;
    switch (request) {
        case RegimeRequest::auto_select:
            regime = lambda_hat < 1.0 ? Regime::small_lambda
                     : lambda_hat <= 6.0 ? Regime::split_finite_lambda
                                         : Regime::split_infinite_lambda;
            break;
        case RegimeRequest::tilde: regime = Regime::tilde; break;
        case RegimeRequest::split: regime = Regime::split_finite_lambda; break;
        case RegimeRequest::small_lambda: regime = Regime::small_lambda; break;
        case RegimeRequest::infinite_lambda: regime = Regime::split_infinite_lambda; break;
        case RegimeRequest::zheng: regime = Regime::zheng; break;
        default: throw InvalidConfig("run_test: bad regime request");
    }

    const BetaEstimate beta = estimate_beta(primary, validation, link);

    std::size_t q_hat;
    Matrix z_hat, z_tilde;
    if (regime == Regime::zheng) {
        q_hat = static_cast<std::size_t>(p);
        z_hat = primary.w;
        z_tilde = validation.w_tilde;
    } else {
        const SdrEstimate sdr = estimate_B(primary, validation);
        q_hat = sdr.q_hat;
        z_hat = primary.w * sdr.B_hat;
        z_tilde = validation.w_tilde * sdr.B_hat;
    }

    BandwidthPlan resolved_plan = plan;
    switch (regime) {
        case Regime::small_lambda: resolved_plan.regime = BandwidthRegime::small_lambda; break;
        case Regime::zheng: resolved_plan.regime = BandwidthRegime::zheng; break;
        default: resolved_plan.regime = BandwidthRegime::standard; break;
    }
    const bool full_sample_v = (regime == Regime::tilde);
    const ResolvedBandwidths bw =
        resolve_bandwidths(resolved_plan, static_cast<std::size_t>(n),
                           static_cast<std::size_t>(N), q_hat, static_cast<std::size_t>(p),
                           full_sample_v);

    const Residuals res =
        compute_residuals(primary, validation, beta.beta_hat, link, bw.v_N);

    TestOutcome out;
    out.regime = regime;
    out.lambda_hat = lambda_hat;
    out.q_hat = q_hat;
    out.beta_hat = beta.beta_hat;
    out.h = bw.h;
    out.v_N = bw.v_N;

    switch (regime) {
        case Regime::tilde: {
            out.raw_statistic = v_tilde(res.e_hat, z_hat, bw.h);
            const TildePlugins pl = variance_plugins_tilde(res.e_hat, res.eta_full, z_hat,
                                                           z_tilde, bw.h, q_hat);
            out.bias_hat = pl.mu;
            out.variance_hat = pl.tau1 + (2.0 / lambda_hat) * pl.tau2 +
                               (1.0 / (lambda_hat * lambda_hat)) * pl.tau3;
            out.scale_factor = static_cast<double>(n) * std::sqrt(bw.h);
            break;
        }
        case Regime::split_finite_lambda: {
            out.raw_statistic = v_split(res.e1, res.e2, z_hat, bw.h);
            out.variance_hat = variance_plugin_split(res.e1, res.e2, res.eta_first,
                                                     res.eta_second, z_hat, z_tilde, bw.h,
                                                     q_hat, lambda_hat);
            out.scale_factor = static_cast<double>(n) * std::sqrt(bw.h);
            break;
        }
        case Regime::split_infinite_lambda: {
            out.raw_statistic = v_split(res.e1, res.e2, z_hat, bw.h);
            const TildePlugins pl = variance_plugins_tilde(res.e_hat, res.eta_full, z_hat,
                                                           z_tilde, bw.h, q_hat);
            out.variance_hat = pl.tau1;
            out.scale_factor = static_cast<double>(n) * std::sqrt(bw.h);
            break;
        }
        case Regime::small_lambda: {
            out.raw_statistic = v_split(res.e1, res.e2, z_hat, bw.h);
            const SmallLambdaPlugins pl = small_lambda_plugins(
                res.eta_first, res.eta_second, z_tilde, bw.v_N, beta.beta_hat);
            out.variance_hat = pl.tau_small;
            out.scale_factor = static_cast<double>(N) * std::sqrt(bw.v_N);
            break;
        }
        case Regime::zheng: {
            out.raw_statistic = v_split(res.e1, res.e2, z_hat, bw.h);
            out.variance_hat = variance_plugin_split(res.e1, res.e2, res.eta_first,
                                                     res.eta_second, z_hat, z_tilde, bw.h,
                                                     q_hat, lambda_hat);
            out.scale_factor = static_cast<double>(n) * std::sqrt(bw.h);
            break;
        }
    }

    if (out.variance_hat <= 1e-14)
        throw InsufficientVariance("run_test: estimated variance below 1e-14, no decision");

    out.standardized =
        out.scale_factor * (out.raw_statistic - out.bias_hat) / std::sqrt(out.variance_hat);
    out.critical_value = convention == CriticalConvention::literal_1_65
                             ? 1.65
                             : normal_upper_quantile(alpha);
    out.reject = out.standardized > out.critical_value;
    return out;
}

}  // namespace eivcheck
