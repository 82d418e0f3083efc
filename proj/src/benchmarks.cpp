#include "pcga/benchmarks.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

namespace pcga {

void TrapSpec::validate() const {
    if (bits_per_block < 2) {
        throw std::invalid_argument("trap needs at least 2 bits per block");
    }
    if (copies < 1) {
        throw std::invalid_argument("trap needs at least 1 block");
    }
    if (!(deceptive_ratio > 0.0 && deceptive_ratio < 1.0)) {
        throw std::invalid_argument("trap deceptive ratio must be in (0, 1)");
    }
}

double trap_block_fitness(std::uint32_t unitation, const TrapSpec& spec) {
    spec.validate();
    const std::uint32_t k = spec.bits_per_block;
    if (unitation > k) {
        throw std::invalid_argument("unitation exceeds block size");
    }
    if (unitation == k) return 1.0;
    return spec.deceptive_ratio * static_cast<double>(k - 1 - unitation) /
           static_cast<double>(k - 1);
}

double concatenated_trap(std::span<const std::uint8_t> genes, const TrapSpec& spec) {
    spec.validate();
    if (genes.size() != spec.length()) {
        throw std::invalid_argument("gene count does not match trap length");
    }
    double total = 0.0;
    const std::uint32_t k = spec.bits_per_block;
    for (std::uint32_t block = 0; block < spec.copies; ++block) {
        std::uint32_t ones = 0;
        for (std::uint32_t bit = 0; bit < k; ++bit) {
            ones += genes[static_cast<std::size_t>(block) * k + bit];
        }
        total += trap_block_fitness(ones, spec);
    }
    return total;
}

std::uint32_t count_solved_blocks(std::span<const std::uint8_t> genes, const TrapSpec& spec) {
    spec.validate();
    if (genes.size() != spec.length()) {
        throw std::invalid_argument("gene count does not match trap length");
    }
    std::uint32_t solved = 0;
    const std::uint32_t k = spec.bits_per_block;
    for (std::uint32_t block = 0; block < spec.copies; ++block) {
        std::uint32_t ones = 0;
        for (std::uint32_t bit = 0; bit < k; ++bit) {
            ones += genes[static_cast<std::size_t>(block) * k + bit];
        }
        if (ones == k) ++solved;
    }
    return solved;
}

double onemax(std::span<const std::uint8_t> genes) {
    std::uint64_t ones = 0;
    for (const auto g : genes) ones += g;
    return static_cast<double>(ones);
}

FitnessFunction make_trap_benchmark(const TrapSpec& spec) {
    spec.validate();
    // Per-unitation lookup keeps the hot path to one table read per block.
    std::vector<double> table(spec.bits_per_block + 1);
    for (std::uint32_t u = 0; u <= spec.bits_per_block; ++u) {
        table[u] = trap_block_fitness(u, spec);
    }
    FitnessFunction f;
    f.name = "trap" + std::to_string(spec.bits_per_block) + "x" + std::to_string(spec.copies);
    f.length = spec.length();
    f.known_optimum = spec.optimum();
    f.total_blocks = spec.copies;
    const std::uint32_t k = spec.bits_per_block;
    const std::uint32_t copies = spec.copies;
    f.evaluate = [table, k, copies](std::span<const std::uint8_t> genes) {
        double total = 0.0;
        const std::uint8_t* g = genes.data();
        for (std::uint32_t block = 0; block < copies; ++block) {
            std::uint32_t ones = 0;
            for (std::uint32_t bit = 0; bit < k; ++bit) ones += g[bit];
            total += table[ones];
            g += k;
        }
        return total;
    };
    f.solved_blocks = [spec](std::span<const std::uint8_t> genes) {
        return count_solved_blocks(genes, spec);
    };
    return f;
}

FitnessFunction make_onemax_benchmark(std::uint32_t length) {
    if (length == 0) throw std::invalid_argument("onemax needs length >= 1");
    FitnessFunction f;
    f.name = "onemax";
    f.length = length;
    f.known_optimum = static_cast<double>(length);
    f.total_blocks = length;
    f.evaluate = [](std::span<const std::uint8_t> genes) { return onemax(genes); };
    f.solved_blocks = [](std::span<const std::uint8_t> genes) {
        std::uint32_t ones = 0;
        for (const auto g : genes) ones += g;
        return ones;
    };
    return f;
}

namespace {

bool parse_u32(std::string_view text, std::uint32_t& out) {
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto result = std::from_chars(begin, end, out);
    return result.ec == std::errc() && result.ptr == end;
}

}  // namespace

FitnessFunction make_benchmark(const std::string& name, std::uint32_t length,
                               double trap_ratio) {
    if (name == "onemax") {
        if (length == 0) {
            throw std::invalid_argument("benchmark 'onemax' needs an explicit length");
        }
        return make_onemax_benchmark(length);
    }
    if (name.rfind("trap", 0) == 0) {
        const std::string_view rest = std::string_view(name).substr(4);
        const auto sep = rest.find('x');
        std::uint32_t k = 0;
        std::uint32_t copies = 0;
        if (sep != std::string_view::npos && parse_u32(rest.substr(0, sep), k) &&
            parse_u32(rest.substr(sep + 1), copies)) {
            TrapSpec spec{k, copies, trap_ratio};
            spec.validate();
            if (length != 0 && length != spec.length()) {
                throw std::invalid_argument("benchmark '" + name + "' implies length " +
                                            std::to_string(spec.length()) + ", got " +
                                            std::to_string(length));
            }
            return make_trap_benchmark(spec);
        }
    }
    throw std::invalid_argument("unknown benchmark '" + name +
                                "' (expected 'onemax' or 'trap<k>x<copies>')");
}

}  // namespace pcga
