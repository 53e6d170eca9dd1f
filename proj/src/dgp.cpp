#include "eivcheck/dgp.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "eivcheck/errors.hpp"

namespace eivcheck {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Matrix cholesky_lower(const Matrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("mvn_sample: covariance not positive definite");
    return llt.matrixL();
}

double mu_of(const ModelSpec& spec, const Vector& x, std::size_t n_for_rate) {
    const double b = spec.beta().dot(x);
    switch (spec.model_id) {
        case ModelId::H11: return b + spec.a * b * b;
        case ModelId::H12: return b + spec.a * std::exp(-b * b / 2.0);
        case ModelId::H13: return b + 2.0 * spec.a * std::cos(0.6 * kPi * b);
        case ModelId::H14: {
            const double b2 = spec.beta2().dot(x);
            return b + spec.a * b2 * b2;
        }
        case ModelId::H15: {
            const double b2 = 2.0 * spec.beta2().dot(x);
            return 2.0 * b + spec.a * b2 * b2 * b2;
        }
        case ModelId::H16: return b * b * b + spec.a * std::abs(b);
        case ModelId::H17: return b * b * b + spec.a * x(2) * x(2);
        case ModelId::H18:
            return b * b * b +
                   spec.a * (x(1) / 4.0 + x(2) * x(2) + std::cos(kPi * x(3)));
        case ModelId::H19:
            return b * b * b +
                   spec.a * (x(1) / 2.0 + x(2) * x(2) + std::cos(kPi * x(3)) +
                             x(4) * std::exp(x(5) / 2.0) + x(7) * x(6));
        case ModelId::local_alt: {
            // Local alternative drift a * n^{-1/2} h^{-1/4} (B'x)^2 with
            // the reference rate h = n^{-1/5} under q = 1, i.e. n^{-9/20}.
            const double rate = std::pow(static_cast<double>(n_for_rate), -9.0 / 20.0);
            return b + spec.a * rate * b * b;
        }
    }
    throw UnknownModel("mu_of: unknown model id");
}

}  // namespace

ModelId model_from_name(const std::string& name) {
    if (name == "H11") return ModelId::H11;
    if (name == "H12") return ModelId::H12;
    if (name == "H13") return ModelId::H13;
    if (name == "H14") return ModelId::H14;
    if (name == "H15") return ModelId::H15;
    if (name == "H16") return ModelId::H16;
    if (name == "H17") return ModelId::H17;
    if (name == "H18") return ModelId::H18;
    if (name == "H19") return ModelId::H19;
    if (name == "local-alt" || name == "local_alt") return ModelId::local_alt;
    throw UnknownModel("unknown model: " + name);
}

std::string model_name(ModelId id) {
    switch (id) {
        case ModelId::H11: return "H11";
        case ModelId::H12: return "H12";
        case ModelId::H13: return "H13";
        case ModelId::H14: return "H14";
        case ModelId::H15: return "H15";
        case ModelId::H16: return "H16";
        case ModelId::H17: return "H17";
        case ModelId::H18: return "H18";
        case ModelId::H19: return "H19";
        case ModelId::local_alt: return "local-alt";
    }
    return "?";
}

LinkFunction ModelSpec::link_for_null() const {
    switch (model_id) {
        case ModelId::H16:
        case ModelId::H17:
        case ModelId::H18:
        case ModelId::H19:
            return LinkFunction::cubic();
        default:
            return LinkFunction::linear();
    }
}

Vector ModelSpec::beta() const {
    switch (model_id) {
        case ModelId::H14:
        case ModelId::H15: {
            Vector b = Vector::Zero(p);
            b(0) = 0.5;
            b(1) = 0.5;
            return b;
        }
        case ModelId::H16:
        case ModelId::H17:
        case ModelId::H18:
        case ModelId::H19: {
            Vector b = Vector::Zero(p);
            b(0) = 1.0;
            return b;
        }
        default:
            return Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    }
}

Vector ModelSpec::beta2() const {
    if (model_id != ModelId::H14 && model_id != ModelId::H15)
        throw UnknownModel("beta2 is defined for H14/H15 only");
    Vector b = Vector::Zero(p);
    b(2) = 0.5;
    b(3) = 0.5;
    return b;
}

Matrix ModelSpec::sigma_x() const {
    if (sigma_choice == SigmaChoice::identity) return Matrix::Identity(p, p);
    Matrix sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            sigma(i, j) = std::pow(0.3, std::abs(static_cast<double>(i - j)));
    return sigma;
}

Vector mvn_sample(SplitRng& rng, const Vector& mean, const Matrix& cov) {
    const Matrix lower = cholesky_lower(cov);
    Vector z(mean.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.next_normal();
    return mean + lower * z;
}

GeneratedData generate(const ModelSpec& spec, std::size_t n, std::size_t N,
                       std::uint64_t seed) {
    if (n < 1 || N < 1) throw InvalidConfig("generate: n and N must be >= 1");
    const Eigen::Index p = spec.p;
    const Matrix lower = cholesky_lower(spec.sigma_x());
    const double sigma_u_sd = std::sqrt(spec.sigma_u_var);

    SplitRng rng_x = SplitRng::stream(seed, {0});
    SplitRng rng_u = SplitRng::stream(seed, {1});
    SplitRng rng_eps = SplitRng::stream(seed, {2});
    SplitRng rng_xv = SplitRng::stream(seed, {3});
    SplitRng rng_uv = SplitRng::stream(seed, {4});

    auto draw_x = [&](SplitRng& rng) {
        Vector z(p);
        for (Eigen::Index k = 0; k < p; ++k) z(k) = rng.next_normal();
        return Vector(lower * z);
    };

    GeneratedData out;
    out.truth = spec;
    out.seed = seed;
    out.primary.y.resize(static_cast<Eigen::Index>(n));
    out.primary.w.resize(static_cast<Eigen::Index>(n), p);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector x = draw_x(rng_x);
        Vector w = x;
        for (Eigen::Index k = 0; k < p; ++k) w(k) += sigma_u_sd * rng_u.next_normal();
        out.primary.w.row(static_cast<Eigen::Index>(i)) = w.transpose();
        out.primary.y(static_cast<Eigen::Index>(i)) = mu_of(spec, x, n) + rng_eps.next_normal();
    }

    out.validation.w_tilde.resize(static_cast<Eigen::Index>(N), p);
    out.validation.x_tilde.resize(static_cast<Eigen::Index>(N), p);
    for (std::size_t s = 0; s < N; ++s) {
        const Vector x = draw_x(rng_xv);
        Vector w = x;
        for (Eigen::Index k = 0; k < p; ++k) w(k) += sigma_u_sd * rng_uv.next_normal();
        out.validation.x_tilde.row(static_cast<Eigen::Index>(s)) = x.transpose();
        out.validation.w_tilde.row(static_cast<Eigen::Index>(s)) = w.transpose();
    }
    return out;
}

}  // namespace eivcheck
