#include "pcga/probability_vector.hpp"

#include <stdexcept>
#include <string>

namespace pcga {

ProbabilityVector::ProbabilityVector(std::uint64_t population_size,
                                     std::vector<std::uint64_t> counts)
    : population_size_(population_size), counts_(std::move(counts)) {
    if (population_size_ < 1) {
        throw std::invalid_argument("population size must be >= 1");
    }
    if (population_size_ > kMaxPopulationSize) {
        throw std::invalid_argument("population size exceeds supported maximum (2^62)");
    }
    if (counts_.empty()) {
        throw std::invalid_argument("probability vector length must be >= 1");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] > population_size_) {
            throw std::invalid_argument("count at gene " + std::to_string(i) +
                                        " exceeds population size");
        }
    }
}

ProbabilityVector ProbabilityVector::uniform(std::uint64_t population_size,
                                             std::uint32_t length) {
    if (population_size % 2 != 0) {
        throw std::invalid_argument(
            "population size must be even: probability 0.5 is unrepresentable otherwise");
    }
    if (length == 0) {
        throw std::invalid_argument("probability vector length must be >= 1");
    }
    return ProbabilityVector(population_size,
                             std::vector<std::uint64_t>(length, population_size / 2));
}

bool ProbabilityVector::add_clamped(std::uint32_t gene, std::int64_t delta) {
    std::uint64_t& c = counts_[gene];
    if (delta >= 0) {
        const std::uint64_t sum = c + static_cast<std::uint64_t>(delta);
        if (sum > population_size_) {
            c = population_size_;
            return true;
        }
        c = sum;
        return false;
    }
    // Unsigned negate handles INT64_MIN without UB.
    const std::uint64_t drop = 0 - static_cast<std::uint64_t>(delta);
    if (drop > c) {
        c = 0;
        return true;
    }
    c -= drop;
    return false;
}

bool ProbabilityVector::converged() const {
    for (const auto c : counts_) {
        if (c != 0 && c != population_size_) return false;
    }
    return true;
}

std::vector<std::uint8_t> ProbabilityVector::decode() const {
    std::vector<std::uint8_t> genes(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        // 2c >= N avoids truncation for odd N; ties round to 1.
        genes[i] = (2 * counts_[i] >= population_size_) ? 1 : 0;
    }
    return genes;
}

}  // namespace pcga
