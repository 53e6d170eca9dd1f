#pragma once

#include <functional>
#include <string>

namespace eivcheck {

enum class LinkId { linear, cubic, custom };

/// Known link function g of the single-index null model, with derivative.
struct LinkFunction {
    LinkId id = LinkId::linear;
    std::function<double(double)> evaluate;
    std::function<double(double)> derivative;

    bool is_linear() const { return id == LinkId::linear; }

    static LinkFunction linear() {
        return {LinkId::linear, [](double t) { return t; }, [](double) { return 1.0; }};
    }
    static LinkFunction cubic() {
        return {LinkId::cubic, [](double t) { return t * t * t; },
                [](double t) { return 3.0 * t * t; }};
    }
    static LinkFunction from_name(const std::string& name);
};

}  // namespace eivcheck
