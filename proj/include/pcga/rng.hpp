#pragma once

#include <cassert>
#include <cstdint>

namespace pcga {

/// Deterministic, seedable, splittable random stream.
///
/// The generator is xoshiro256** seeded through the splitmix64 finalizer, so
/// the output sequence depends only on the 64-bit seed and is identical on
/// every platform (no standard-library distributions are involved anywhere).
/// derive(i) produces an independent child stream as a pure function of
/// (seed, i) — it ignores how much of the parent stream has been consumed,
/// which keeps worker streams reproducible regardless of scheduling.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : key_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix_next(sm);
    }

    std::uint64_t seed_key() const { return key_; }

    /// Independent child stream for consumer `index`.
    SplitRng derive(std::uint64_t index) const {
        return SplitRng(mix(key_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform draw in [0, bound), exactly unbiased (Lemire multiply-shift
    /// with rejection). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        assert(bound >= 1);
        unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix_next(std::uint64_t& state) {
        state += 0x9E3779B97F4A7C15ULL;
        return mix(state);
    }

    std::uint64_t key_;
    std::uint64_t state_[4];
};

}  // namespace pcga
