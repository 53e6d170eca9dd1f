#pragma once

#include <Eigen/Dense>

namespace eivcheck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observed sample: responses y paired with error-prone covariates w (n x p).
struct PrimarySample {
    Vector y;
    Matrix w;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return w.cols(); }
};

/// Validation sample: surrogate w_tilde and true covariate x_tilde, both N x p.
struct ValidationSample {
    Matrix w_tilde;
    Matrix x_tilde;

    Eigen::Index N() const { return w_tilde.rows(); }
    Eigen::Index p() const { return w_tilde.cols(); }
};

}  // namespace eivcheck
