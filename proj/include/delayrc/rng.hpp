#pragma once

// Counter-addressable PRNG used everywhere in the project. The generator is
// splitmix64: output i of a stream with seed s is mix(s + (i+1)*GAMMA), so a
// stream can be replayed or split at any counter position without iterating.
// Child seeds for parallel fan-out are derived by hashing (master seed, label,
// indices) through the same mixer, which keeps runs bitwise reproducible for
// any worker count.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace delayrc {

namespace detail {

constexpr std::uint64_t splitmix_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class rng {
public:
    using result_type = std::uint64_t;

    explicit rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return detail::mix64(seed_ + (++counter_) * detail::splitmix_gamma); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t counter() const { return counter_; }
    void jump_to(std::uint64_t counter) { counter_ = counter; }

    // UniformRandomBitGenerator interface for std::shuffle and friends.
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }
    result_type operator()() { return next_u64(); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Stable child-seed derivation: hash the master seed, an ASCII label and any
/// number of indices through the splitmix mixer. Same inputs, same seed, on
/// every platform.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t h = detail::mix64(master + detail::splitmix_gamma);
    for (unsigned char c : label) h = detail::mix64(h + c + detail::splitmix_gamma);
    for (std::uint64_t idx : indices) h = detail::mix64(h + idx + detail::splitmix_gamma);
    return h;
}

}  // namespace delayrc
