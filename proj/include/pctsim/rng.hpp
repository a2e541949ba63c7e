#ifndef PCTSIM_RNG_HPP
#define PCTSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pctsim/constants.hpp"

namespace pctsim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/**
 * @brief One independent random stream (xoshiro256++ core).
 *
 * Self-contained generator and distributions so that sequences are
 * bit-exact for a given key, independent of the standard library.
 */
class Substream {
public:
    explicit Substream(std::uint64_t key) {
        // Expand the key into four nonzero state words.
        std::uint64_t sm = key;
        for (auto& w : state_) w = detail::splitmix64(sm);
        cached_normal_valid_ = false;
        bit_pool_ = 0;
        bits_left_ = 0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [0,1); never returns exactly 0 (safe for log()).
    double uniform_open() {
        const double u = uniform();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (cached_normal_valid_) {
            cached_normal_valid_ = false;
            return cached_normal_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double phi = 2.0 * kPi * uniform();
        cached_normal_ = r * std::sin(phi);
        cached_normal_valid_ = true;
        return r * std::cos(phi);
    }

    /// Circular complex gaussian with E|z|^2 = 1.
    cplx complex_normal() {
        const double re = normal();
        const double im = normal();
        return cplx(re * 0.70710678118654752440, im * 0.70710678118654752440);
    }

    /// One equiprobable bit, drawn from a 64-bit pool.
    int bit() {
        if (bits_left_ == 0) {
            bit_pool_ = next_u64();
            bits_left_ = 64;
        }
        const int b = static_cast<int>(bit_pool_ & 1u);
        bit_pool_ >>= 1;
        --bits_left_;
        return b;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool cached_normal_valid_ = false;
    std::uint64_t bit_pool_ = 0;
    int bits_left_ = 0;
};

/**
 * @brief Root of all randomness for one experiment.
 *
 * Substreams are keyed by (seed, name, index); consuming one stream never
 * perturbs another, so Monte Carlo trials can run in any order or in
 * parallel and still reproduce bit-identically.
 */
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    Substream stream(std::string_view name, std::uint64_t index = 0) const {
        std::uint64_t k = seed_;
        k = mix(k, detail::fnv1a64(name));
        k = mix(k, index);
        return Substream(k);
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
        return detail::splitmix64(s);
    }

    std::uint64_t seed_;
};

/// n independent equiprobable bits; deterministic per substream state.
inline std::vector<int> generate_bits(Substream& rng, std::size_t n) {
    std::vector<int> bits(n);
    for (auto& b : bits) b = rng.bit();
    return bits;
}

}  // namespace pctsim

#endif
