#include <doctest.h>

#include <cmath>

#include "pcga/benchmarks.hpp"
#include "support.hpp"

using namespace pcga;
using testsupport::bits;

namespace {
const TrapSpec kPaperTrap{3, 10, 0.7};
}

TEST_CASE("trap block values at k=3, ratio 0.7") {
    CHECK(trap_block_fitness(3, kPaperTrap) == doctest::Approx(1.0));
    CHECK(trap_block_fitness(0, kPaperTrap) == doctest::Approx(0.7));
    CHECK(trap_block_fitness(1, kPaperTrap) == doctest::Approx(0.35));
    CHECK(trap_block_fitness(2, kPaperTrap) == doctest::Approx(0.0));
    CHECK_THROWS_AS(trap_block_fitness(4, kPaperTrap), std::invalid_argument);
}

TEST_CASE("trap deception holds over every block value") {
    // Brute force all 2^k blocks for a few sizes: the all-zeros attractor
    // beats every non-optimal unitation.
    for (std::uint32_t k : {2u, 3u, 4u, 5u}) {
        const TrapSpec spec{k, 1, 0.7};
        const double at_zero = trap_block_fitness(0, spec);
        for (std::uint32_t u = 1; u < k; ++u) {
            CHECK(at_zero > trap_block_fitness(u, spec));
        }
        CHECK(trap_block_fitness(k, spec) == doctest::Approx(1.0));
    }
}

TEST_CASE("concatenated trap sums blocks") {
    CHECK(concatenated_trap(bits("111111111111111111111111111111"), kPaperTrap) ==
          doctest::Approx(10.0));
    CHECK(concatenated_trap(bits("000000000000000000000000000000"), kPaperTrap) ==
          doctest::Approx(7.0));
    // 111 000 alternating: 5 optimal blocks + 5 deceptive blocks.
    CHECK(concatenated_trap(bits("111000111000111000111000111000"), kPaperTrap) ==
          doctest::Approx(8.5));
    CHECK_THROWS_AS(concatenated_trap(bits("111"), kPaperTrap), std::invalid_argument);
}

TEST_CASE("solved block counting") {
    CHECK(count_solved_blocks(bits("111111111111111111111111111111"), kPaperTrap) == 10);
    CHECK(count_solved_blocks(bits("000000000000000000000000000000"), kPaperTrap) == 0);
    CHECK(count_solved_blocks(bits("111000000000000000000000000000"), kPaperTrap) == 1);
    CHECK_THROWS_AS(count_solved_blocks(bits("10"), kPaperTrap), std::invalid_argument);
}

TEST_CASE("onemax is plain unitation") {
    CHECK(onemax(bits("11111")) == doctest::Approx(5.0));
    CHECK(onemax(bits("00000")) == doctest::Approx(0.0));
    CHECK(onemax(bits("10101")) == doctest::Approx(3.0));
}

TEST_CASE("only the all-ones string attains the trap optimum") {
    // Exhaustive check at k=3 with up to 3 copies.
    for (std::uint32_t copies : {1u, 2u, 3u}) {
        const TrapSpec spec{3, copies, 0.7};
        const std::uint32_t length = spec.length();
        const double optimum = spec.optimum();
        int hits = 0;
        for (std::uint32_t value = 0; value < (1u << length); ++value) {
            std::vector<std::uint8_t> genes(length);
            std::uint32_t solved_expected = 0;
            for (std::uint32_t i = 0; i < length; ++i) {
                genes[i] = (value >> i) & 1;
            }
            for (std::uint32_t block = 0; block < copies; ++block) {
                bool all_ones = true;
                for (std::uint32_t bit = 0; bit < 3; ++bit) {
                    if (genes[block * 3 + bit] == 0) all_ones = false;
                }
                if (all_ones) ++solved_expected;
            }
            const double fitness = concatenated_trap(genes, spec);
            const std::uint32_t solved = count_solved_blocks(genes, spec);
            CHECK(solved == solved_expected);
            // Full fitness iff every block is solved, and vice versa.
            CHECK((solved == copies) == (fitness == doctest::Approx(optimum)));
            if (fitness >= optimum) ++hits;
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("benchmark factory") {
    const auto trap = make_benchmark("trap3x10", 0);
    CHECK(trap.length == 30);
    CHECK(trap.total_blocks == 10);
    CHECK(trap.known_optimum == doctest::Approx(10.0));
    CHECK(trap.evaluate(bits("111000111000111000111000111000")) == doctest::Approx(8.5));
    CHECK(trap.solved_blocks(bits("111000111000111000111000111000")) == 5);

    const auto ones = make_benchmark("onemax", 12);
    CHECK(ones.length == 12);
    CHECK(ones.known_optimum == doctest::Approx(12.0));

    CHECK_THROWS_AS(make_benchmark("trap3x10", 29), std::invalid_argument);
    CHECK_THROWS_AS(make_benchmark("onemax", 0), std::invalid_argument);
    CHECK_THROWS_AS(make_benchmark("nosuch", 8), std::invalid_argument);
    CHECK_THROWS_AS(make_benchmark("trap1x4", 0), std::invalid_argument);
}
