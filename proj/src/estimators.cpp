#include "eivcheck/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eivcheck/errors.hpp"

namespace eivcheck {

namespace {

constexpr double kMaxCondition = 1e12;

// Solver for (D_v' D_v)^{-1} D_v' g(X_v beta), with the condition check
// done once.
struct ProjectionSolver {
    Eigen::LLT<Matrix> llt;
    Matrix design_v_t;

    explicit ProjectionSolver(const Matrix& design_v) {
        const Matrix gram = design_v.transpose() * design_v;
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        const Vector& ev = es.eigenvalues();
        if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kMaxCondition)
            throw SingularDesign("ls_objective: D_v' D_v ill-conditioned");
        llt.compute(gram);
        design_v_t = design_v.transpose();
    }

    Vector coefficients(const Vector& target_v) const {
        return llt.solve(design_v_t * target_v);
    }
};

Vector apply_link(const LinkFunction& link, const Matrix& x_v, const Vector& beta) {
    Vector index = x_v * beta;
    for (Eigen::Index s = 0; s < index.size(); ++s) index(s) = link.evaluate(index(s));
    return index;
}

struct NelderMeadResult {
    Vector x;
    double value;
    bool converged;
    std::size_t iterations;
};

template <typename F>
NelderMeadResult nelder_mead(F&& objective, const Vector& start, double tol,
                             std::size_t max_iter) {
    const Eigen::Index dim = start.size();
    std::vector<Vector> simplex;
    simplex.reserve(static_cast<std::size_t>(dim) + 1);
    simplex.push_back(start);
    for (Eigen::Index k = 0; k < dim; ++k) {
        Vector v = start;
        v(k) += 0.25 * std::max(1.0, std::abs(start(k)));
        simplex.push_back(v);
    }
    std::vector<double> values(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = objective(simplex[i]);

    std::size_t iter = 0;
    auto order = [&] {
        std::vector<std::size_t> idx(simplex.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Vector> s2;
        std::vector<double> v2;
        for (std::size_t i : idx) {
            s2.push_back(simplex[i]);
            v2.push_back(values[i]);
        }
        simplex.swap(s2);
        values.swap(v2);
    };

    for (; iter < max_iter; ++iter) {
        order();
        double diameter = 0.0;
        for (std::size_t i = 1; i < simplex.size(); ++i)
            diameter = std::max(diameter, (simplex[i] - simplex[0]).norm());
        if (diameter < tol) return {simplex[0], values[0], true, iter};

        Vector centroid = Vector::Zero(dim);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
        centroid /= static_cast<double>(simplex.size() - 1);

        const Vector& worst = simplex.back();
        Vector reflected = centroid + (centroid - worst);
        const double fr = objective(reflected);
        if (fr < values[0]) {
            Vector expanded = centroid + 2.0 * (centroid - worst);
            const double fe = objective(expanded);
            if (fe < fr) {
                simplex.back() = expanded;
                values.back() = fe;
            } else {
                simplex.back() = reflected;
                values.back() = fr;
            }
        } else if (fr < values[values.size() - 2]) {
            simplex.back() = reflected;
            values.back() = fr;
        } else {
            Vector contracted = centroid + 0.5 * (worst - centroid);
            const double fc = objective(contracted);
            if (fc < values.back()) {
                simplex.back() = contracted;
                values.back() = fc;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    values[i] = objective(simplex[i]);
                }
            }
        }
    }
    order();
    return {simplex[0], values[0], false, iter};
}

}  // namespace

Matrix build_design(const Matrix& w_rows, const LinkFunction& link) {
    if (link.is_linear()) return w_rows;
    const Eigen::Index m = w_rows.rows();
    const Eigen::Index p = w_rows.cols();
    Matrix design(m, 2 * p + 1);
    design.col(0).setOnes();
    design.middleCols(1, p) = w_rows;
    design.middleCols(1 + p, p) = w_rows.array().square().matrix();
    return design;
}

double ls_objective(const Vector& beta, const Vector& y, const Matrix& design,
                    const Matrix& design_v, const Matrix& x_v, const LinkFunction& link) {
    ProjectionSolver solver(design_v);
    const Vector fitted = design * solver.coefficients(apply_link(link, x_v, beta));
    return (y - fitted).squaredNorm() / static_cast<double>(y.size());
}

BetaEstimate estimate_beta(const PrimarySample& primary, const ValidationSample& validation,
                           const LinkFunction& link) {
    const Matrix design = build_design(primary.w, link);
    const Matrix design_v = build_design(validation.w_tilde, link);
    ProjectionSolver solver(design_v);

    if (link.is_linear()) {
        // argmin_beta ||Y - D (D_v'D_v)^{-1} D_v' X_v beta||^2 is ordinary
        // least squares of Y on A = D (D_v'D_v)^{-1} D_v' X_v.
        Matrix coeffs(design_v.cols(), validation.p());
        for (Eigen::Index k = 0; k < validation.p(); ++k)
            coeffs.col(k) = solver.coefficients(validation.x_tilde.col(k));
        const Matrix projected = design * coeffs;  // n x p
        const Matrix gram = projected.transpose() * projected;
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        const Vector& ev = es.eigenvalues();
        if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kMaxCondition)
            throw SingularDesign("estimate_beta: projected design ill-conditioned");
        Vector beta = gram.llt().solve(projected.transpose() * primary.y);
        const double value =
            ls_objective(beta, primary.y, design, design_v, validation.x_tilde, link);
        return BetaEstimate{std::move(beta), value, true, 0};
    }

    auto objective = [&](const Vector& beta) {
        const Vector fitted =
            design * solver.coefficients(apply_link(link, validation.x_tilde, beta));
        return (primary.y - fitted).squaredNorm() / static_cast<double>(primary.n());
    };

    // Surrogate OLS start: regress y on w directly.
    Vector ols_start =
        (primary.w.transpose() * primary.w)
            .ldlt()
            .solve(primary.w.transpose() * primary.y);

    std::vector<Vector> starts = {ols_start, Vector::Zero(primary.p()), 0.5 * ols_start,
                                  1.5 * ols_start, 2.0 * ols_start};
    const std::size_t max_iter = 2000 * static_cast<std::size_t>(primary.p());

    BetaEstimate best;
    best.objective_value = std::numeric_limits<double>::infinity();
    for (const Vector& start : starts) {
        NelderMeadResult r = nelder_mead(objective, start, 1e-8, max_iter);
        if (r.value < best.objective_value) {
            best.beta_hat = r.x;
            best.objective_value = r.value;
            best.converged = r.converged;
            best.iterations = r.iterations;
        }
    }
    return best;
}

}  // namespace eivcheck
