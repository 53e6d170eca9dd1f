#include <doctest.h>

#include <cmath>

#include "eivcheck/dgp.hpp"
#include "eivcheck/errors.hpp"
#include "eivcheck/sdr.hpp"

using namespace eivcheck;

namespace {

double cos_angle(const Vector& a, const Vector& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("surrogate predictors: proportional measurement gives scaled identity") {
    // x = 0.5 w exactly, so Cov(X,W) = 0.5 Sigma_W and zeta = 0.5 w.
    ValidationSample validation;
    validation.w_tilde.resize(6, 1);
    validation.w_tilde << 1.0, -1.0, 2.0, -2.0, 0.5, -0.5;
    validation.x_tilde = 0.5 * validation.w_tilde;

    Matrix primary_w(3, 1);
    primary_w << 1.0, 2.0, -3.0;
    const Matrix zeta = surrogate_predictors(primary_w, validation);
    for (int i = 0; i < 3; ++i)
        CHECK(zeta(i, 0) == doctest::Approx(0.5 * primary_w(i, 0)).epsilon(1e-12));
}

TEST_CASE("surrogate predictors: no measurement error reduces to identity") {
    ValidationSample validation;
    validation.w_tilde.resize(5, 2);
    validation.w_tilde << 1, 0, 0, 1, -1, 2, 2, -1, 1, 1;
    validation.x_tilde = validation.w_tilde;
    Matrix primary_w(2, 2);
    primary_w << 3, -4, 0.25, 10;
    const Matrix zeta = surrogate_predictors(primary_w, validation);
    CHECK((zeta - primary_w).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("surrogate predictors: hand-built 2x2 arithmetic") {
    ValidationSample validation;
    validation.w_tilde.resize(4, 2);
    validation.w_tilde << 1, 2, -1, 0, 2, -1, 0, 1;
    validation.x_tilde.resize(4, 2);
    validation.x_tilde << 0.5, 1.5, -0.5, 0.5, 1.5, -1, 0.5, 1;

    // Independent route: explicit centered moment matrices.
    const Matrix wc = validation.w_tilde.rowwise() - validation.w_tilde.colwise().mean();
    const Matrix xc = validation.x_tilde.rowwise() - validation.x_tilde.colwise().mean();
    const Matrix sigma_w = wc.transpose() * wc / 3.0;
    const Matrix cov_xw = xc.transpose() * wc / 3.0;

    Matrix primary_w(1, 2);
    primary_w << 1.0, -2.0;
    const Vector expected = cov_xw * sigma_w.inverse() * primary_w.row(0).transpose();
    const Matrix zeta = surrogate_predictors(primary_w, validation);
    CHECK(zeta(0, 0) == doctest::Approx(expected(0)).epsilon(1e-10));
    CHECK(zeta(0, 1) == doctest::Approx(expected(1)).epsilon(1e-10));
}

TEST_CASE("surrogate predictors: degenerate validation covariance") {
    ValidationSample validation;
    validation.w_tilde = Matrix::Ones(6, 2);  // zero variance
    validation.x_tilde = validation.w_tilde;
    Matrix primary_w = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(surrogate_predictors(primary_w, validation), SingularCovariance);
}

TEST_CASE("dee candidate matrix: constant y gives zero matrix") {
    Matrix zeta(4, 2);
    zeta << 1, 2, -1, 3, 0.5, -2, 2, 0;
    Vector y = Vector::Constant(4, 7.0);
    const Matrix lambda = dee_candidate_matrix(zeta, y);
    CHECK(lambda.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dee candidate matrix: scalar enumeration oracle") {
    Matrix zeta(3, 1);
    zeta << 0, 1, 2;
    Vector y(3);
    y << 1, 2, 3;

    // Oracle: standardize, enumerate the 3 thresholds directly.
    const double mean = 1.0;
    const double sd = std::sqrt(((0 - mean) * (0 - mean) + (1 - mean) * (1 - mean) +
                                 (2 - mean) * (2 - mean)) /
                                2.0);
    double expected = 0.0;
    for (int j = 0; j < 3; ++j) {
        double m = 0.0;
        for (int i = 0; i < 3; ++i)
            if (y(i) <= y(j)) m += (zeta(i, 0) - mean) / sd;
        m /= 3.0;
        expected += m * m;
    }
    expected /= 3.0;

    const Matrix lambda = dee_candidate_matrix(zeta, y);
    CHECK(lambda(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dee candidate matrix: permutation equivariance") {
    SplitRng rng(5);
    Matrix zeta(20, 3);
    Vector y(20);
    for (int i = 0; i < 20; ++i) {
        for (int k = 0; k < 3; ++k) zeta(i, k) = rng.next_normal();
        y(i) = rng.next_normal();
    }
    Matrix perm = Matrix::Zero(3, 3);
    perm(0, 2) = perm(1, 0) = perm(2, 1) = 1.0;

    const Matrix direct = dee_candidate_matrix(zeta, y);
    const Matrix permuted = dee_candidate_matrix(zeta * perm.transpose(), y);
    CHECK((permuted - perm * direct * perm.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dee candidate matrix is symmetric PSD") {
    SplitRng rng(9);
    Matrix zeta(30, 4);
    Vector y(30);
    for (int i = 0; i < 30; ++i) {
        for (int k = 0; k < 4; ++k) zeta(i, k) = rng.next_normal();
        y(i) = zeta(i, 0) + 0.1 * rng.next_normal();
    }
    const Matrix lambda = dee_candidate_matrix(zeta, y);
    CHECK((lambda - lambda.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda);
    CHECK(es.eigenvalues()(0) >= -1e-10);
}

TEST_CASE("select_q direct evaluations") {
    Vector ev1(4);
    ev1 << 1, 0, 0, 0;
    CHECK(select_q(ev1, 100) == 1);

    Vector ev2(4);
    ev2 << 1, 1, 0, 0;
    CHECK(select_q(ev2, 10000) == 2);

    Vector zeros = Vector::Zero(4);
    CHECK_THROWS_AS(select_q(zeros, 100), DegenerateSpectrum);
}

TEST_CASE("select_q equals direct oracle on equal spectra and random spectra") {
    auto oracle = [](const Vector& ev, std::size_t n) {
        auto term = [](double lam) { return std::log1p(lam) - lam; };
        double denom = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) denom += term(ev(i));
        double best = -1e300;
        std::size_t best_l = 1;
        for (Eigen::Index l = 1; l <= ev.size(); ++l) {
            double num = 0.0;
            for (Eigen::Index i = 0; i < l; ++i) num += term(ev(i));
            const double score = n / 2.0 * num / denom -
                                 2.0 * std::sqrt(double(n)) * l * (l + 1) / (2.0 * ev.size());
            if (score > best) {
                best = score;
                best_l = std::size_t(l);
            }
        }
        return best_l;
    };

    Vector equal = Vector::Constant(5, 0.7);
    CHECK(select_q(equal, 400) == oracle(equal, 400));

    SplitRng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Vector ev(4);
        for (int i = 0; i < 4; ++i) ev(i) = rng.next_uniform();
        std::sort(ev.data(), ev.data() + 4, std::greater<>());
        const std::size_t n = 50 + (rng.next_u64() % 1000);
        CHECK(select_q(ev, n) == oracle(ev, n));
    }
}

TEST_CASE("estimate_B: orthonormal columns and PSD spectrum") {
    ModelSpec spec;
    spec.model_id = ModelId::H11;
    spec.p = 3;
    spec.a = 0.0;
    const GeneratedData data = generate(spec, 150, 600, 21);
    const SdrEstimate est = estimate_B(data.primary, data.validation);
    const Matrix gram = est.B_hat.transpose() * est.B_hat;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 1; i < est.eigenvalues.size(); ++i)
        CHECK(est.eigenvalues(i) <= est.eigenvalues(i - 1) + 1e-14);
}

TEST_CASE("estimate_B: pure-noise response yields q_hat = 1") {
    ModelSpec spec;
    spec.model_id = ModelId::H11;
    spec.p = 2;
    GeneratedData data = generate(spec, 200, 800, 33);
    SplitRng rng(77);
    for (Eigen::Index i = 0; i < data.primary.y.size(); ++i)
        data.primary.y(i) = rng.next_normal();  // response independent of w
    const SdrEstimate est = estimate_B(data.primary, data.validation);
    CHECK(est.q_hat == 1);
    CHECK(est.eigenvalues(0) < 0.2);
}

TEST_CASE("estimate_B: orthogonal rotation equivariance of the span") {
    ModelSpec spec;
    spec.model_id = ModelId::H11;
    spec.p = 2;
    const GeneratedData data = generate(spec, 200, 800, 55);

    const double angle = 0.7;
    Matrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);

    PrimarySample rotated_primary{data.primary.y, data.primary.w * rot.transpose()};
    ValidationSample rotated_validation{data.validation.w_tilde * rot.transpose(),
                                        data.validation.x_tilde * rot.transpose()};

    const SdrEstimate base = estimate_B(data.primary, data.validation);
    const SdrEstimate rotated = estimate_B(rotated_primary, rotated_validation);
    REQUIRE(base.q_hat == rotated.q_hat);

    // Span equality via projection distance.
    const Matrix expected = rot * base.B_hat;
    const Matrix proj_a = expected * expected.transpose();
    const Matrix proj_b = rotated.B_hat * rotated.B_hat.transpose();
    CHECK((proj_a - proj_b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("estimate_B: recovers the index direction under the null (short MC)") {
    ModelSpec spec;
    spec.model_id = ModelId::H11;
    spec.p = 2;
    spec.a = 0.0;
    const Vector beta = spec.beta();

    int q1 = 0;
    double cos_sum = 0.0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const GeneratedData data = generate(spec, 200, 800, 1000 + std::uint64_t(r));
        const SdrEstimate est = estimate_B(data.primary, data.validation);
        if (est.q_hat == 1) {
            ++q1;
            cos_sum += cos_angle(est.B_hat.col(0), beta);
        }
    }
    CHECK(q1 >= 40);
    CHECK(cos_sum / q1 >= 0.9);
}
