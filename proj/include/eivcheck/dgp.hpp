#pragma once

#include <cstdint>
#include <string>

#include "eivcheck/data.hpp"
#include "eivcheck/link.hpp"
#include "eivcheck/rng.hpp"

namespace eivcheck {

enum class ModelId { H11, H12, H13, H14, H15, H16, H17, H18, H19, local_alt };

ModelId model_from_name(const std::string& name);
std::string model_name(ModelId id);

enum class SigmaChoice { identity, ar03 };

/// Simulation model: covariate law, measurement-error scale, alternative
/// strength a, and the single-index null the test fits.
struct ModelSpec {
    ModelId model_id = ModelId::H11;
    Eigen::Index p = 2;
    double a = 0.0;
    SigmaChoice sigma_choice = SigmaChoice::identity;
    double sigma_u_var = 0.5;  // variance per measurement-error coordinate

    /// Link of the null model fitted by the test (linear for H11-H15 and
    /// local_alt, cubic for H16-H19).
    LinkFunction link_for_null() const;

    /// Study-specified index vectors.
    Vector beta() const;   // primary index
    Vector beta2() const;  // second index (H14/H15 only)

    Matrix sigma_x() const;
};

struct GeneratedData {
    PrimarySample primary;
    ValidationSample validation;
    ModelSpec truth;
    std::uint64_t seed = 0;
};

/// One multivariate normal draw via the lower Cholesky factor of cov.
Vector mvn_sample(SplitRng& rng, const Vector& mean, const Matrix& cov);

/// Seeded generation of primary and validation samples. Sub-streams for
/// {x, u, eps, x_tilde, u_tilde} are derived from (seed) in a fixed
/// order, so draws are bit-reproducible and the two samples independent.
GeneratedData generate(const ModelSpec& spec, std::size_t n, std::size_t N,
                       std::uint64_t seed);

}  // namespace eivcheck
