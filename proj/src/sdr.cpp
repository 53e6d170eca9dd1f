#include "eivcheck/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eivcheck/errors.hpp"

namespace eivcheck {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr std::size_t kMaxThresholds = 500;

// Relative weight of the variance-slice candidate against the slice-mean
// candidate in estimate_B. The SAVE-type squaring damps sub-unit signal
// eigenvalues, so the companion needs upweighting for the BIC dimension
// criterion to register spread-only directions.
// Relative weight of the variance-slice companion.  Small by design: it
// only needs to lift symmetric directions that slice means miss, while
// staying below the slice-mean eigenvalue so the leading direction and
// the null-dimension decision remain mean-driven.
constexpr double kVarianceWeight = 0.2;

// Symmetric inverse square root; throws SingularCovariance when the
// condition number exceeds kMaxCondition.
Matrix inverse_sqrt(const Matrix& cov, const char* who) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector& ev = es.eigenvalues();  // ascending
    const double low = ev(0);
    const double high = ev(ev.size() - 1);
    if (!(low > 0.0) || high / low > kMaxCondition)
        throw SingularCovariance(std::string(who) + ": covariance numerically singular");
    Vector inv_root = ev.array().sqrt().inverse();
    return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sample_covariance(const Matrix& rows) {
    const Eigen::Index m = rows.rows();
    const Matrix centered = rows.rowwise() - rows.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(m - 1);
}

// Shared discretization bookkeeping for the slice-based candidates:
// y-sorted order, tie-aware inclusive prefix bound, and the threshold
// subsample.
struct SliceIndex {
    std::vector<Eigen::Index> order;
    std::vector<Eigen::Index> last_tie;
    std::vector<Eigen::Index> thresholds;
};

static SliceIndex build_slice_index(const Vector& y) {
    const Eigen::Index n = y.size();
    SliceIndex idx;
    idx.order.resize(static_cast<std::size_t>(n));
    std::iota(idx.order.begin(), idx.order.end(), Eigen::Index{0});
    std::sort(idx.order.begin(), idx.order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return y(a) < y(b); });

    idx.last_tie.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        if (j + 1 < n && y(idx.order[static_cast<std::size_t>(j)]) ==
                             y(idx.order[static_cast<std::size_t>(j + 1)]))
            idx.last_tie[static_cast<std::size_t>(j)] = idx.last_tie[static_cast<std::size_t>(j + 1)];
        else
            idx.last_tie[static_cast<std::size_t>(j)] = j;
    }

    if (static_cast<std::size_t>(n) <= kMaxThresholds) {
        idx.thresholds.resize(static_cast<std::size_t>(n));
        std::iota(idx.thresholds.begin(), idx.thresholds.end(), Eigen::Index{0});
    } else {
        idx.thresholds.reserve(kMaxThresholds);
        for (std::size_t k = 0; k < kMaxThresholds; ++k)
            idx.thresholds.push_back(static_cast<Eigen::Index>(
                (static_cast<double>(k) + 0.5) * static_cast<double>(n) /
                static_cast<double>(kMaxThresholds)));
    }
    return idx;
}

// Variance-slice companion to the slice-mean candidate: averages the
// binary-slice SAVE matrix p(I - V1)^2 + (1-p)(I - V0)^2 over the same
// thresholds, in the same standardized coordinates. Directions that move
// only the conditional spread (symmetric alternatives) are invisible to
// the slice means but show up here; under a single-index null both
// candidates are rank one in the same direction.
static Matrix variance_slice_matrix(const Matrix& standardized, const SliceIndex& idx) {
    const Eigen::Index n = standardized.rows();
    const Eigen::Index p = standardized.cols();

    std::vector<Vector> sum_prefix(static_cast<std::size_t>(n));
    std::vector<Matrix> outer_prefix(static_cast<std::size_t>(n));
    Vector s = Vector::Zero(p);
    Matrix q = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector row = standardized.row(idx.order[static_cast<std::size_t>(j)]).transpose();
        s += row;
        q.noalias() += row * row.transpose();
        sum_prefix[static_cast<std::size_t>(j)] = s;
        outer_prefix[static_cast<std::size_t>(j)] = q;
    }
    const Matrix eye = Matrix::Identity(p, p);

    // Thresholds with small groups make the within-group covariance (and
    // hence its squared deviation from identity) pure noise, so both
    // groups must be comfortably larger than the dimension.
    const double min_group =
        std::max(static_cast<double>(p + 2), 0.1 * static_cast<double>(n));

    Matrix lambda = Matrix::Zero(p, p);
    std::size_t used = 0;
    for (Eigen::Index j : idx.thresholds) {
        const Eigen::Index cut = idx.last_tie[static_cast<std::size_t>(j)];
        const double m1 = static_cast<double>(cut + 1);
        const double m0 = static_cast<double>(n) - m1;
        if (m1 < min_group || m0 < min_group) continue;
        const Vector& s1 = sum_prefix[static_cast<std::size_t>(cut)];
        const Matrix& q1 = outer_prefix[static_cast<std::size_t>(cut)];
        const Vector s0 = s - s1;
        const Matrix q0 = q - q1;
        const Matrix v1 = q1 / m1 - (s1 / m1) * (s1 / m1).transpose();
        const Matrix v0 = q0 / m0 - (s0 / m0) * (s0 / m0).transpose();
        const Matrix a1 = eye - v1;
        const Matrix a0 = eye - v0;
        lambda.noalias() += (m1 / static_cast<double>(n)) * a1 * a1 +
                            (m0 / static_cast<double>(n)) * a0 * a0;
        ++used;
    }
    if (used == 0) return Matrix::Zero(p, p);
    lambda /= static_cast<double>(used);
    lambda = 0.5 * (lambda + lambda.transpose()).eval();

    // Even with V = I the sample covariance of a group of size m inflates
    // each diagonal of (I - V_hat)^2 by about (p + 1) / m in expectation;
    // the size-weighted sum over both groups is 2 (p + 1) / n.  Remove that
    // bias and clamp at zero so noise directions stay silent.
    lambda -= (2.0 * static_cast<double>(p + 1) / static_cast<double>(n)) * eye;
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda);
    const Vector clamped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Matrix surrogate_predictors(const Matrix& primary_w, const ValidationSample& validation) {
    const Eigen::Index N = validation.N();
    const Eigen::Index p = validation.p();
    if (N < p + 2)
        throw SingularCovariance("surrogate_predictors: validation sample too small");
    if (primary_w.cols() != p)
        throw DimensionMismatch("surrogate_predictors: primary/validation dimension conflict");

    const Matrix wc = validation.w_tilde.rowwise() - validation.w_tilde.colwise().mean();
    const Matrix xc = validation.x_tilde.rowwise() - validation.x_tilde.colwise().mean();
    const Matrix sigma_w = wc.transpose() * wc / static_cast<double>(N - 1);
    const Matrix cov_xw = xc.transpose() * wc / static_cast<double>(N - 1);

    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_w);
        const Vector& ev = es.eigenvalues();
        if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kMaxCondition)
            throw SingularCovariance("surrogate_predictors: Sigma_W numerically singular");
    }

    const Matrix transform = cov_xw * sigma_w.llt().solve(Matrix::Identity(p, p));
    return primary_w * transform.transpose();
}

Matrix dee_candidate_matrix(const Matrix& zeta, const Vector& y) {
    const Eigen::Index n = zeta.rows();
    const Eigen::Index p = zeta.cols();
    if (n < 2) throw DimensionMismatch("dee_candidate_matrix: need n >= 2");
    if (y.size() != n) throw DimensionMismatch("dee_candidate_matrix: y length mismatch");

    const Matrix root_inv = inverse_sqrt(sample_covariance(zeta), "dee_candidate_matrix");
    const Matrix centered = zeta.rowwise() - zeta.colwise().mean();
    const Matrix standardized = centered * root_inv;  // n x p
    const SliceIndex idx = build_slice_index(y);

    // m(t) at each observed threshold is a tie-aware prefix sum in
    // y-sorted order.
    Matrix prefix(n, p);
    Vector acc = Vector::Zero(p);
    for (Eigen::Index j = 0; j < n; ++j) {
        acc += standardized.row(idx.order[static_cast<std::size_t>(j)]).transpose();
        prefix.row(j) = acc.transpose();
    }

    Matrix lambda = Matrix::Zero(p, p);
    for (Eigen::Index j : idx.thresholds) {
        const Vector m = prefix.row(idx.last_tie[static_cast<std::size_t>(j)]).transpose() /
                         static_cast<double>(n);
        lambda.noalias() += m * m.transpose();
    }
    lambda /= static_cast<double>(idx.thresholds.size());
    return 0.5 * (lambda + lambda.transpose());
}

std::size_t select_q(const Vector& eigenvalues, std::size_t n) {
    const Eigen::Index p = eigenvalues.size();
    if (p < 1 || n < 2) throw DimensionMismatch("select_q: need p >= 1, n >= 2");

    auto term = [](double lam) { return std::log1p(lam) - lam; };  // <= 0 always
    double denom = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) denom += term(eigenvalues(i));
    if (!(denom < 0.0)) throw DegenerateSpectrum("select_q: spectrum is identically zero");

    const double dn = static_cast<double>(n);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_l = 1;
    double running = 0.0;
    for (Eigen::Index l = 1; l <= p; ++l) {
        running += term(eigenvalues(l - 1));
        const double ld = static_cast<double>(l);
        const double score = (dn / 2.0) * (running / denom) -
                             2.0 * std::sqrt(dn) * ld * (ld + 1.0) /
                                 (2.0 * static_cast<double>(p));
        if (score > best) {  // ties break toward smaller l
            best = score;
            best_l = static_cast<std::size_t>(l);
        }
    }
    return best_l;
}

SdrEstimate estimate_B(const PrimarySample& primary, const ValidationSample& validation) {
    const Eigen::Index p = primary.p();
    const Matrix zeta = surrogate_predictors(primary.w, validation);
    const Matrix root_inv = inverse_sqrt(sample_covariance(zeta), "estimate_B");
    // Slice-mean candidate plus its variance-slice companion so that
    // purely symmetric alternative directions are not missed.
    const Matrix standardized =
        (zeta.rowwise() - zeta.colwise().mean()).eval() * root_inv;
    const SliceIndex idx = build_slice_index(primary.y);
    const Matrix lambda = dee_candidate_matrix(zeta, primary.y) +
                          kVarianceWeight * variance_slice_matrix(standardized, idx);

    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda);
    Vector eigenvalues(p);
    Matrix vectors(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {  // descending order
        eigenvalues(i) = es.eigenvalues()(p - 1 - i);
        vectors.col(i) = es.eigenvectors().col(p - 1 - i);
    }

    std::size_t q_hat;
    try {
        q_hat = select_q(eigenvalues, static_cast<std::size_t>(primary.n()));
    } catch (const DegenerateSpectrum&) {
        q_hat = 1;
    }

    // Back-transform the leading standardized directions, then restore
    // column orthonormality without disturbing the span.
    Matrix directions = root_inv * vectors.leftCols(static_cast<Eigen::Index>(q_hat));
    Eigen::HouseholderQR<Matrix> qr(directions);
    Matrix B = qr.householderQ() * Matrix::Identity(p, static_cast<Eigen::Index>(q_hat));
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
        Eigen::Index arg;
        B.col(k).cwiseAbs().maxCoeff(&arg);
        if (B(arg, k) < 0.0) B.col(k) = -B.col(k);
    }

    return SdrEstimate{std::move(B), q_hat, std::move(eigenvalues), lambda};
}

}  // namespace eivcheck
