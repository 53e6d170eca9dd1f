#pragma once

namespace eivcheck {

/// Upper-alpha standard normal quantile, i.e. z with P(Z > z) = alpha.
double normal_upper_quantile(double alpha);

}  // namespace eivcheck
