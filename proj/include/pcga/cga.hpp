#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pcga/benchmarks.hpp"
#include "pcga/probability_vector.hpp"
#include "pcga/rng.hpp"

namespace pcga {

/// Parameters of one compact GA instance.
struct CgaParams {
    std::uint64_t population_size = 2;  // N; must be even and >= 2
    std::uint32_t selection_rate = 2;   // s; tournament size, >= 2
    std::uint64_t seed = 1;             // master seed of the random stream

    void validate() const;
};

struct Individual {
    std::vector<std::uint8_t> genes;
    double fitness = std::numeric_limits<double>::quiet_NaN();
};

/// Fresh model of the given length, every gene at probability 0.5.
ProbabilityVector init_vector(const CgaParams& params, std::uint32_t length);

/// Samples one gene string from the model, consuming exactly one bounded
/// draw per gene: gene i is 1 with probability counts[i]/N exactly.
inline void sample_genes(const ProbabilityVector& v, SplitRng& rng,
                         std::span<std::uint8_t> out) {
    const std::uint64_t n = v.population_size();
    const auto& counts = v.counts();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = rng.next_below(n) < counts[i] ? 1 : 0;
    }
}

/// Samples a full Individual (fitness left unset).
Individual sample_individual(const ProbabilityVector& v, SplitRng& rng);

/// Applies one tournament outcome: at every gene where winner and loser
/// differ, the count moves one step toward the winner's allele, clamped to
/// [0, N]. Genes where they agree are untouched. The caller is responsible
/// for the fitness ordering of the two arguments.
void compete_and_update(ProbabilityVector& v, std::span<const std::uint8_t> winner,
                        std::span<const std::uint8_t> loser);
void compete_and_update(ProbabilityVector& v, const Individual& winner,
                        const Individual& loser);

/// Reusable sampling workspace so the hot loop never allocates.
class CgaScratch {
public:
    void ensure(std::uint32_t samples, std::uint32_t length) {
        if (genes_.size() < static_cast<std::size_t>(samples) * length) {
            genes_.resize(static_cast<std::size_t>(samples) * length);
            fitness_.resize(samples);
        }
        length_ = length;
    }
    std::span<std::uint8_t> row(std::uint32_t i) {
        return {genes_.data() + static_cast<std::size_t>(i) * length_, length_};
    }
    std::span<const std::uint8_t> row(std::uint32_t i) const {
        return {genes_.data() + static_cast<std::size_t>(i) * length_, length_};
    }
    double& fitness(std::uint32_t i) { return fitness_[i]; }
    double fitness(std::uint32_t i) const { return fitness_[i]; }

private:
    std::vector<std::uint8_t> genes_;
    std::vector<double> fitness_;
    std::uint32_t length_ = 0;
};

/// External limits on one tournament round (used by the simulator).
struct TurnLimits {
    std::optional<double> stop_at_fitness;  // abort as soon as a sample reaches it
    std::uint64_t max_evaluations = std::numeric_limits<std::uint64_t>::max();
};

struct TurnOutcome {
    std::uint32_t evaluations = 0;   // samples actually evaluated this turn
    std::uint32_t best_index = 0;    // ties break to the lowest sample index
    double best_fitness = 0.0;
    bool hit_stop_fitness = false;
    bool updates_applied = false;    // true iff the sampling phase completed
};

/// One tournament round of the compact GA: sample s individuals, evaluate
/// each (checking the limits after every evaluation), and — when all s were
/// evaluated — update the model by competing the best against each of the
/// other s−1, in sample order. A round cut short by a limit applies no
/// updates.
TurnOutcome run_turn(ProbabilityVector& v, const CgaParams& params,
                     const FitnessFunction& f, SplitRng& rng, CgaScratch& scratch,
                     const TurnLimits& limits = {});

struct IterationResult {
    Individual best;
    std::uint32_t evaluations = 0;
};

/// Unlimited round with a convenience return of the round's best individual.
IterationResult cga_iteration(ProbabilityVector& v, const CgaParams& params,
                              const FitnessFunction& f, SplitRng& rng);

}  // namespace pcga
