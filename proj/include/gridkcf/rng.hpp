#pragma once

#include <cstdint>

namespace gridkcf {

// splitmix64 step. Good avalanche, trivially portable, and stateless when used
// as a hash, which is what the simulator needs for reproducible noise fields.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash a key into a well-mixed 64-bit value (single splitmix step).
inline std::uint64_t hash64(std::uint64_t key) {
    return splitmix64(key);
}

// Combine two keys into one stream id. Order matters on purpose.
inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ 0x2545f4914f6cdd1dULL;
    std::uint64_t h = splitmix64(s);
    s = h ^ b;
    return splitmix64(s);
}

// 53-bit uniform in [0,1) from a 64-bit word.
inline double to_unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Small deterministic generator. Not crypto, just reproducible across
// platforms, which std::mt19937 distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0,1)
    double uniform() { return to_unit_double(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace gridkcf
