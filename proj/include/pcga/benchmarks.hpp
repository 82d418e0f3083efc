#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace pcga {

/// Concatenated deceptive trap: `copies` independent blocks of
/// `bits_per_block` bits each. A block scores 1.0 at all-ones and otherwise
/// slopes linearly from `deceptive_ratio` (all-zeros) down to 0 at one bit
/// short of the optimum.
struct TrapSpec {
    std::uint32_t bits_per_block = 3;
    std::uint32_t copies = 10;
    double deceptive_ratio = 0.7;

    std::uint32_t length() const { return bits_per_block * copies; }
    double optimum() const { return static_cast<double>(copies); }
    void validate() const;
};

/// Fitness of one block given its unitation (number of ones).
double trap_block_fitness(std::uint32_t unitation, const TrapSpec& spec);

/// Sum of block fitnesses over consecutive non-overlapping blocks.
double concatenated_trap(std::span<const std::uint8_t> genes, const TrapSpec& spec);

/// Number of blocks set to all-ones.
std::uint32_t count_solved_blocks(std::span<const std::uint8_t> genes, const TrapSpec& spec);

/// Unitation of the whole string.
double onemax(std::span<const std::uint8_t> genes);

/// Uniform benchmark interface for the simulator, the harness and the
/// networked worker. Evaluation must be pure and deterministic.
struct FitnessFunction {
    std::string name;
    std::uint32_t length = 0;
    std::optional<double> known_optimum;
    std::uint32_t total_blocks = 0;
    std::function<double(std::span<const std::uint8_t>)> evaluate;
    std::function<std::uint32_t(std::span<const std::uint8_t>)> solved_blocks;
};

FitnessFunction make_trap_benchmark(const TrapSpec& spec);
FitnessFunction make_onemax_benchmark(std::uint32_t length);

/// Builds a benchmark from its CLI/config name: "onemax" or "trap<k>x<copies>"
/// (e.g. "trap3x10"). `length` 0 means "derive from the name" (traps only);
/// a nonzero length must match the name's.
FitnessFunction make_benchmark(const std::string& name, std::uint32_t length,
                               double trap_ratio = 0.7);

}  // namespace pcga
