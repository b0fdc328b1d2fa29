#pragma once

#include <cstdint>

namespace magvit {

inline constexpr std::uint64_t kRngGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; also used as the mixing step for stream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a + kRngGamma + b);
}

// Counter-based splitmix64 stream. Cheap to construct, bit-stable across
// platforms, and splittable: derived streams are independent of the parent's
// position, which lets decoding key one stream per (step, position).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kRngGamma;
        return mix64(state_);
    }

    // Uniform in [0, 1); 53 mantissa bits, never returns 1.0.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Derive an independent stream keyed by (a, b) without advancing *this.
    Rng split(std::uint64_t a, std::uint64_t b = 0) const {
        return Rng(hash_combine(hash_combine(state_, a), b));
    }

private:
    std::uint64_t state_;
};

} // namespace magvit
