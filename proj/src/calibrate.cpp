#include "eivcheck/calibrate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace eivcheck {

CalibrationFn::CalibrationFn(std::vector<double> abscissae, std::vector<double> ordinates,
                             double v_N)
    : abscissae_(std::move(abscissae)), ordinates_(std::move(ordinates)), v_N_(v_N) {
    if (abscissae_.empty() || abscissae_.size() != ordinates_.size())
        throw std::invalid_argument("CalibrationFn: empty or mismatched support");
    if (!(v_N_ > 0.0)) throw std::invalid_argument("CalibrationFn: bandwidth must be positive");
}

double CalibrationFn::operator()(double u) const {
    return nw_regression_or_nearest(abscissae_, ordinates_, v_N_, u, spec_);
}

double CalibrationFn::evaluate_excluding(double u, std::size_t skip) const {
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < abscissae_.size(); ++s) {
        if (s == skip) continue;
        const double weight = kernel_eval(spec_, (u - abscissae_[s]) / v_N_);
        num += weight * ordinates_[s];
        den += weight;
    }
    if (den > 0.0) return num / den;
    // Nearest-point fallback, still excluding `skip`.
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_s = skip;
    for (std::size_t s = 0; s < abscissae_.size(); ++s) {
        if (s == skip) continue;
        const double d = std::abs(u - abscissae_[s]);
        if (d < best) {
            best = d;
            best_s = s;
        }
    }
    if (best_s == skip) throw std::invalid_argument("evaluate_excluding: single-point support");
    return ordinates_[best_s];
}

namespace {

// Abscissae beta' w_tilde and ordinates g(beta' x_tilde) for validation
// rows [begin, end).
std::pair<std::vector<double>, std::vector<double>> support_points(
    const ValidationSample& validation, const Vector& beta_hat, const LinkFunction& link,
    Eigen::Index begin, Eigen::Index end) {
    std::vector<double> abscissae, ordinates;
    abscissae.reserve(static_cast<std::size_t>(end - begin));
    ordinates.reserve(static_cast<std::size_t>(end - begin));
    for (Eigen::Index s = begin; s < end; ++s) {
        abscissae.push_back(beta_hat.dot(validation.w_tilde.row(s)));
        ordinates.push_back(link.evaluate(beta_hat.dot(validation.x_tilde.row(s))));
    }
    return {std::move(abscissae), std::move(ordinates)};
}

}  // namespace

CalibrationFn fit_r_full(const ValidationSample& validation, const Vector& beta_hat,
                         const LinkFunction& link, double v_N) {
    auto [abscissae, ordinates] = support_points(validation, beta_hat, link, 0, validation.N());
    return CalibrationFn(std::move(abscissae), std::move(ordinates), v_N);
}

std::pair<CalibrationFn, CalibrationFn> fit_r_split(const ValidationSample& validation,
                                                    const Vector& beta_hat,
                                                    const LinkFunction& link, double v_N) {
    const Eigen::Index half = validation.N() / 2;  // odd N: last row dropped
    if (half < 1) throw std::invalid_argument("fit_r_split: need N >= 2");
    auto [a1, o1] = support_points(validation, beta_hat, link, 0, half);
    auto [a2, o2] = support_points(validation, beta_hat, link, half, 2 * half);
    return {CalibrationFn(std::move(a1), std::move(o1), v_N),
            CalibrationFn(std::move(a2), std::move(o2), v_N)};
}

Residuals compute_residuals(const PrimarySample& primary, const ValidationSample& validation,
                            const Vector& beta_hat, const LinkFunction& link, double v_N) {
    const Eigen::Index n = primary.n();
    const Eigen::Index half = validation.N() / 2;

    const CalibrationFn r_full = fit_r_full(validation, beta_hat, link, v_N);
    auto [r1, r2] = fit_r_split(validation, beta_hat, link, v_N);

    Residuals out;
    out.e_hat.resize(n);
    out.e1.resize(n);
    out.e2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = beta_hat.dot(primary.w.row(i));
        out.e_hat(i) = primary.y(i) - r_full(u);
        out.e1(i) = primary.y(i) - r1(u);
        out.e2(i) = primary.y(i) - r2(u);
    }

    out.eta_first.resize(half);
    out.eta_second.resize(half);
    for (Eigen::Index t = 0; t < half; ++t) {
        const double g_t = link.evaluate(beta_hat.dot(validation.x_tilde.row(t)));
        out.eta_first(t) = g_t - r2(beta_hat.dot(validation.w_tilde.row(t)));
    }
    for (Eigen::Index s = half; s < 2 * half; ++s) {
        const double g_s = link.evaluate(beta_hat.dot(validation.x_tilde.row(s)));
        out.eta_second(s - half) = g_s - r1(beta_hat.dot(validation.w_tilde.row(s)));
    }

    // Leave-one-out eta for the full-sample statistic's plug-ins:
    // self-inclusion would push M(0)/(N v_N) into every eta and bias the
    // variance estimates downward.
    const Eigen::Index N = validation.N();
    out.eta_full.resize(N);
    for (Eigen::Index s = 0; s < N; ++s) {
        const double g_s = link.evaluate(beta_hat.dot(validation.x_tilde.row(s)));
        const double u = beta_hat.dot(validation.w_tilde.row(s));
        out.eta_full(s) = g_s - r_full.evaluate_excluding(u, static_cast<std::size_t>(s));
    }
    return out;
}

}  // namespace eivcheck
