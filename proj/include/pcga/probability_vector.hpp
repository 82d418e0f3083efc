#pragma once

#include <cstdint>
#include <vector>

namespace pcga {

/// Compact model of a size-N population: one allele-1 frequency count per
/// gene, each in [0, N]. Probabilities are always derived as count/N on
/// demand; nothing is ever stored as floating point.
class ProbabilityVector {
public:
    // Counts are 64-bit but N is capped so that count +/- delta arithmetic
    // can never overflow signed/unsigned 64-bit intermediates.
    static constexpr std::uint64_t kMaxPopulationSize = 1ULL << 62;

    ProbabilityVector() = default;
    ProbabilityVector(std::uint64_t population_size, std::vector<std::uint64_t> counts);

    /// Fresh model with every gene at probability 0.5 (count N/2).
    /// Requires an even population size; 0.5 is unrepresentable otherwise.
    static ProbabilityVector uniform(std::uint64_t population_size, std::uint32_t length);

    std::uint32_t length() const { return static_cast<std::uint32_t>(counts_.size()); }
    std::uint64_t population_size() const { return population_size_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t count(std::uint32_t gene) const { return counts_[gene]; }
    double probability(std::uint32_t gene) const {
        return static_cast<double>(counts_[gene]) / static_cast<double>(population_size_);
    }

    /// One competition outcome at `gene`: +1 if the winner's allele is 1,
    /// -1 otherwise, clamped to [0, N] (a count at a boundary stays there).
    void apply_win(std::uint32_t gene, bool winner_allele) {
        std::uint64_t& c = counts_[gene];
        if (winner_allele) {
            if (c < population_size_) ++c;
        } else {
            if (c > 0) --c;
        }
    }

    /// Adds `delta` to the count at `gene`, clamping to [0, N].
    /// Returns true when the clamp actually triggered.
    bool add_clamped(std::uint32_t gene, std::int64_t delta);

    /// True iff every count is 0 or N: the model represents a single string.
    bool converged() const;

    /// Most likely string under the model: gene i is 1 iff count >= N/2
    /// (ties round to 1).
    std::vector<std::uint8_t> decode() const;

    bool operator==(const ProbabilityVector&) const = default;

private:
    std::uint64_t population_size_ = 0;
    std::vector<std::uint64_t> counts_;
};

}  // namespace pcga
