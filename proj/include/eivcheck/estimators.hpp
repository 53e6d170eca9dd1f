#pragma once

#include <cstddef>

#include "eivcheck/data.hpp"
#include "eivcheck/link.hpp"

namespace eivcheck {

struct BetaEstimate {
    Vector beta_hat;
    double objective_value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Design rows for the projection least-squares criterion: the raw
/// covariates for the linear link, (1, w, w^2) componentwise (no cross
/// terms) otherwise.
Matrix build_design(const Matrix& w_rows, const LinkFunction& link);

/// Q_n(beta) = n^{-1} || Y - D (D_v' D_v)^{-1} D_v' g(X_v beta) ||^2.
double ls_objective(const Vector& beta, const Vector& y, const Matrix& design,
                    const Matrix& design_v, const Matrix& x_v, const LinkFunction& link);

/// Minimizes Q_n. Linear links solve the closed-form least-squares
/// problem; nonlinear links run Nelder-Mead from five starts (the
/// surrogate OLS point, zero, and three scalings of the OLS point).
BetaEstimate estimate_beta(const PrimarySample& primary, const ValidationSample& validation,
                           const LinkFunction& link);

}  // namespace eivcheck
