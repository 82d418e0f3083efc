#pragma once

// Shared generators and reference implementations for the test suites. The
// reference code here is deliberately written independently of the library
// paths it checks.

#include <cstdint>
#include <string>
#include <vector>

#include "pcga/cga.hpp"
#include "pcga/probability_vector.hpp"
#include "pcga/protocol.hpp"
#include "pcga/rng.hpp"

namespace testsupport {

inline std::vector<std::uint8_t> bits(const std::string& text) {
    std::vector<std::uint8_t> genes;
    genes.reserve(text.size());
    for (const char c : text) {
        if (c == '0') genes.push_back(0);
        else if (c == '1') genes.push_back(1);
    }
    return genes;
}

inline pcga::ProbabilityVector random_vector(pcga::SplitRng& rng, std::uint64_t max_population,
                                             std::uint32_t max_length) {
    const std::uint64_t population = 1 + rng.next_below(max_population);
    const auto length = static_cast<std::uint32_t>(1 + rng.next_below(max_length));
    std::vector<std::uint64_t> counts(length);
    for (auto& c : counts) c = rng.next_below(population + 1);
    return pcga::ProbabilityVector(population, std::move(counts));
}

/// Naive one-bit-at-a-time packer; the independent oracle for encode_counts.
inline std::vector<std::uint8_t> reference_pack(const pcga::ProbabilityVector& v) {
    std::uint32_t width = 0;
    while ((std::uint64_t(1) << width) <= v.population_size()) ++width;
    // width now satisfies 2^width > N, i.e. width = ceil(log2(N+1)).
    std::vector<bool> bitstream;
    for (const auto count : v.counts()) {
        for (std::uint32_t b = 0; b < width; ++b) {
            bitstream.push_back(((count >> (width - 1 - b)) & 1) != 0);
        }
    }
    while (bitstream.size() % 8 != 0) bitstream.push_back(false);
    std::vector<std::uint8_t> bytes(bitstream.size() / 8, 0);
    for (std::size_t i = 0; i < bitstream.size(); ++i) {
        if (bitstream[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return bytes;
}

/// Hand-coded canonical two-sample compact GA step: sample a and b, compare,
/// move every disagreeing gene one 1/N step toward the winner. Consumes the
/// stream exactly like the library's s=2 tournament round.
inline void reference_two_sample_step(pcga::ProbabilityVector& v, pcga::SplitRng& rng,
                                      const pcga::FitnessFunction& f) {
    std::vector<std::uint8_t> a(v.length());
    std::vector<std::uint8_t> b(v.length());
    for (std::uint32_t i = 0; i < v.length(); ++i) {
        a[i] = rng.next_below(v.population_size()) < v.count(i) ? 1 : 0;
    }
    for (std::uint32_t i = 0; i < v.length(); ++i) {
        b[i] = rng.next_below(v.population_size()) < v.count(i) ? 1 : 0;
    }
    const double fa = f.evaluate(a);
    const double fb = f.evaluate(b);
    const auto& winner = fb > fa ? b : a;  // tie keeps the first sample
    const auto& loser = fb > fa ? a : b;
    for (std::uint32_t i = 0; i < v.length(); ++i) {
        if (winner[i] != loser[i]) {
            v.apply_win(i, winner[i] != 0);
        }
    }
}

}  // namespace testsupport
