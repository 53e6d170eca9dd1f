#include "eivcheck/link.hpp"

#include "eivcheck/errors.hpp"

namespace eivcheck {

LinkFunction LinkFunction::from_name(const std::string& name) {
    if (name == "linear") return linear();
    if (name == "cubic") return cubic();
    throw InvalidConfig("unknown link: " + name);
}

}  // namespace eivcheck
