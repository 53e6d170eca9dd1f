#pragma once

#include <string>

#include "eivcheck/data.hpp"

namespace eivcheck {

/// CSV with header `y,w1,...,wp`; p inferred. `#` lines are comments.
PrimarySample load_primary(const std::string& path);

/// CSV with header `w1..wp,x1..xp`; p must equal expected_p when
/// expected_p > 0.
ValidationSample load_validation(const std::string& path, Eigen::Index expected_p = 0);

void save_primary(const PrimarySample& sample, const std::string& path);
void save_validation(const ValidationSample& sample, const std::string& path);

}  // namespace eivcheck
