#pragma once

#include <stdexcept>
#include <string>

namespace eivcheck {

struct SingularCovariance : std::runtime_error {
    explicit SingularCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct SingularDesign : std::runtime_error {
    explicit SingularDesign(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateSpectrum : std::runtime_error {
    explicit DegenerateSpectrum(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyWindow : std::runtime_error {
    explicit EmptyWindow(const std::string& what) : std::runtime_error(what) {}
};

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownModel : std::runtime_error {
    explicit UnknownModel(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientVariance : std::runtime_error {
    explicit InsufficientVariance(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ")"),
          row(row), column(col) {}
    std::size_t row;
    std::size_t column;
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteValue : std::runtime_error {
    explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eivcheck
