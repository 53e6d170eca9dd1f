#pragma once

#include <cstddef>

#include "eivcheck/data.hpp"

namespace eivcheck {

/// Estimated base matrix of the central subspace together with the
/// spectrum that drove the dimension choice.
struct SdrEstimate {
    Matrix B_hat;            // p x q_hat, column-orthonormal
    std::size_t q_hat = 1;   // in [1, p]
    Vector eigenvalues;      // length p, descending
    Matrix candidate_matrix; // p x p symmetric PSD (standardized coordinates)
};

/// Least-squares predictions of X from W: zeta_i = Cov(X,W) Sigma_W^{-1} w_i.
/// Both moment matrices are estimated from the validation rows only.
Matrix surrogate_predictors(const Matrix& primary_w, const ValidationSample& validation);

/// Candidate matrix of the discretization-expectation construction built
/// on sliced inverse regression with all observed thresholds:
///   m(t) = n^{-1} sum_i zeta*_i I(y_i <= t)
///   Lambda = n^{-1} sum_j m(y_j) m(y_j)^T
/// in coordinates standardized to identity sample covariance. Above 500
/// observations the threshold set is a stratified subsample of 500 order
/// statistics.
Matrix dee_candidate_matrix(const Matrix& zeta, const Vector& y);

/// BIC-type choice of the structural dimension from the descending
/// spectrum; ties break toward the smaller dimension. Throws
/// DegenerateSpectrum when the whole spectrum is zero.
std::size_t select_q(const Vector& eigenvalues, std::size_t n);

/// Full pipeline: surrogate predictors -> candidate matrix ->
/// eigendecomposition -> dimension choice. A degenerate spectrum maps to
/// q_hat = 1 with the leading eigenvector.
SdrEstimate estimate_B(const PrimarySample& primary, const ValidationSample& validation);

}  // namespace eivcheck
