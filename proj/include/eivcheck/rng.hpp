#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace eivcheck {

// Counter-based splittable generator built on the splitmix64 mixing function.
// A stream is identified by a 64-bit key derived from the master seed and an
// arbitrary list of stream ids; successive outputs walk the Weyl sequence
// key + k*gamma through the mixer. Streams with distinct ids are independent
// and bit-reproducible regardless of evaluation order.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t key) : key_(key), counter_(0) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Derives a child key by folding each id into the parent key.
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
        std::uint64_t k = mix(seed);
        for (std::uint64_t id : ids) k = mix(k ^ (id + 0x6a09e667f3bcc909ULL));
        return k;
    }

    static SplitRng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
        return SplitRng(derive(seed, ids));
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    // Uniform on (0, 1), 53-bit mantissa, never exactly 0.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; deterministic across platforms
    // (std::normal_distribution is implementation-defined).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace eivcheck
