#pragma once

#include <vector>

#include "eivcheck/data.hpp"
#include "eivcheck/kernels.hpp"
#include "eivcheck/link.hpp"

namespace eivcheck {

/// Kernel-regression calibration curve u -> E[g(beta' X) | beta' W = u],
/// materialized as its abscissae/ordinates and evaluated lazily with the
/// nearest-point fallback on empty windows.
class CalibrationFn {
  public:
    CalibrationFn(std::vector<double> abscissae, std::vector<double> ordinates, double v_N);

    double operator()(double u) const;
    /// Leave-one-out evaluation: excludes the support point at `skip`.
    double evaluate_excluding(double u, std::size_t skip) const;

    std::size_t size() const { return abscissae_.size(); }

  private:
    std::vector<double> abscissae_;
    std::vector<double> ordinates_;
    double v_N_;
    KernelSpec spec_;
};

/// All residual sets entering the test statistics.
struct Residuals {
    Vector e_hat;       // n, full-sample calibration
    Vector e1;          // n, first-half calibration
    Vector e2;          // n, second-half calibration
    Vector eta_first;   // N/2, validation rows 1..N/2 calibrated by the second half
    Vector eta_second;  // N/2, rows N/2+1..N calibrated by the first half
    Vector eta_full;    // N, leave-one-out full-sample calibration
};

CalibrationFn fit_r_full(const ValidationSample& validation, const Vector& beta_hat,
                         const LinkFunction& link, double v_N);

/// First- and second-half calibration estimators. Odd N drops the last
/// validation row before halving.
std::pair<CalibrationFn, CalibrationFn> fit_r_split(const ValidationSample& validation,
                                                    const Vector& beta_hat,
                                                    const LinkFunction& link, double v_N);

Residuals compute_residuals(const PrimarySample& primary, const ValidationSample& validation,
                            const Vector& beta_hat, const LinkFunction& link, double v_N);

}  // namespace eivcheck
