#pragma once

#include <bit>
#include <cstdint>

namespace bct {

// splitmix64 finalizer (Steele, Lea, Flood / Vigna). Used for state expansion
// and for deriving per-task child seeds.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// k-th output of the splitmix64 stream started at `root`. This is the
// documented counter-based split used for parallel estimation: task k of a
// run with root seed s draws from rng(child_seed(s, k)), so merged tallies
// depend only on (root seed, task count), never on scheduling.
inline std::uint64_t child_seed(std::uint64_t root, std::uint64_t k) {
    return splitmix64_mix(root + (k + 1) * 0x9E3779B97F4A7C15ull);
}

// xoshiro256** 1.0 (Blackman & Vigna, 2018). Public-domain reference
// algorithm; chosen because it is named, tiny, fast, and bit-exactly
// reproducible across platforms, unlike std::mt19937_64 + distributions.
class rng {
public:
    explicit rng(std::uint64_t seed) {
        // expand the 64-bit seed through splitmix64, per the authors' advice
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z += 0x9E3779B97F4A7C15ull;
            word = splitmix64_mix(z);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound) by bitmask rejection: draw ceil(log2 bound)
    // bits and retry on overshoot. Unbiased for every bound (no modulo), with
    // fewer than 2 draws expected.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound | 1);
        for (;;) {
            const std::uint64_t x = next() & mask;
            if (x < bound) return x;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_[4];
};

}  // namespace bct
