#pragma once

#include <cstddef>
#include <string>

#include "eivcheck/calibrate.hpp"
#include "eivcheck/data.hpp"
#include "eivcheck/kernels.hpp"
#include "eivcheck/link.hpp"

namespace eivcheck {

enum class Regime { tilde, split_finite_lambda, split_infinite_lambda, small_lambda, zheng };

enum class RegimeRequest { auto_select, tilde, split, small_lambda, infinite_lambda, zheng };

enum class CriticalConvention { normal_quantile, literal_1_65 };

std::string regime_name(Regime regime);
RegimeRequest regime_request_from_name(const std::string& name);

struct TestOutcome {
    double raw_statistic = 0.0;   // V_n or the full-sample variant
    double scale_factor = 0.0;    // n h^{1/2} or N v_N^{1/2}
    double bias_hat = 0.0;        // mu-hat; 0 for the bias-corrected statistics
    double variance_hat = 0.0;
    double standardized = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    Regime regime = Regime::split_finite_lambda;
    double lambda_hat = 0.0;  // N / n

    // Diagnostics surfaced by the CLI report.
    std::size_t q_hat = 1;
    Vector beta_hat;
    double h = 0.0;
    double v_N = 0.0;
};

/// Quadratic form [n(n-1)]^{-1} sum_{i != j} e_i K_h(z_i - z_j) e_j.
double v_tilde(const Vector& e_hat, const Matrix& z_hat, double h);

/// Split-residual form with e1 on the left and e2 on the right.
double v_split(const Vector& e1, const Vector& e2, const Matrix& z_hat, double h);

struct TildePlugins {
    double tau1 = 0.0;
    double tau2 = 0.0;
    double tau3 = 0.0;
    double mu = 0.0;
};

TildePlugins variance_plugins_tilde(const Vector& e_hat, const Vector& eta_full,
                                    const Matrix& z_hat, const Matrix& z_tilde, double h,
                                    std::size_t q_hat);

double variance_plugin_split(const Vector& e1, const Vector& e2, const Vector& eta_first,
                             const Vector& eta_second, const Matrix& z_hat,
                             const Matrix& z_tilde, double h, std::size_t q_hat,
                             double lambda_hat);

struct SmallLambdaPlugins {
    double nu = 0.0;
    double tau_small = 0.0;
};

SmallLambdaPlugins small_lambda_plugins(const Vector& eta_first, const Vector& eta_second,
                                        const Matrix& z_tilde, double v_N,
                                        const Vector& beta_hat);

/// Full pipeline: beta estimation, dimension reduction, bandwidths,
/// residuals, statistic and standardization for the requested regime.
TestOutcome run_test(const PrimarySample& primary, const ValidationSample& validation,
                     const LinkFunction& link, const BandwidthPlan& plan, double alpha,
                     RegimeRequest request,
                     CriticalConvention convention = CriticalConvention::normal_quantile);

}  // namespace eivcheck
