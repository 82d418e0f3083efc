#include "pcga/cga.hpp"

#include <algorithm>
#include <stdexcept>

namespace pcga {

void CgaParams::validate() const {
    if (population_size < 2 || population_size % 2 != 0) {
        throw std::invalid_argument("population size must be even and >= 2");
    }
    if (population_size > ProbabilityVector::kMaxPopulationSize) {
        throw std::invalid_argument("population size exceeds supported maximum (2^62)");
    }
    if (selection_rate < 2) {
        throw std::invalid_argument("selection rate must be >= 2");
    }
}

ProbabilityVector init_vector(const CgaParams& params, std::uint32_t length) {
    params.validate();
    return ProbabilityVector::uniform(params.population_size, length);
}

Individual sample_individual(const ProbabilityVector& v, SplitRng& rng) {
    Individual ind;
    ind.genes.resize(v.length());
    sample_genes(v, rng, ind.genes);
    return ind;
}

void compete_and_update(ProbabilityVector& v, std::span<const std::uint8_t> winner,
                        std::span<const std::uint8_t> loser) {
    if (winner.size() != v.length() || loser.size() != v.length()) {
        throw std::invalid_argument("individual length does not match the model");
    }
    for (std::uint32_t i = 0; i < v.length(); ++i) {
        if (winner[i] != loser[i]) {
            v.apply_win(i, winner[i] != 0);
        }
    }
}

void compete_and_update(ProbabilityVector& v, const Individual& winner,
                        const Individual& loser) {
    compete_and_update(v, std::span<const std::uint8_t>(winner.genes),
                       std::span<const std::uint8_t>(loser.genes));
}

TurnOutcome run_turn(ProbabilityVector& v, const CgaParams& params,
                     const FitnessFunction& f, SplitRng& rng, CgaScratch& scratch,
                     const TurnLimits& limits) {
    const std::uint32_t s = params.selection_rate;
    if (f.length != v.length()) {
        throw std::invalid_argument("benchmark length does not match the model");
    }
    if (limits.max_evaluations == 0) {
        throw std::invalid_argument("turn needs a budget of at least one evaluation");
    }
    scratch.ensure(s, v.length());

    TurnOutcome out;
    const std::uint64_t budget = std::min<std::uint64_t>(s, limits.max_evaluations);
    for (std::uint32_t j = 0; j < budget; ++j) {
        auto genes = scratch.row(j);
        sample_genes(v, rng, genes);
        const double fit = f.evaluate(genes);
        scratch.fitness(j) = fit;
        ++out.evaluations;
        if (j == 0 || fit > out.best_fitness) {
            out.best_fitness = fit;
            out.best_index = j;
        }
        if (limits.stop_at_fitness && fit >= *limits.stop_at_fitness) {
            out.hit_stop_fitness = true;
            break;
        }
    }

    if (out.evaluations == s) {
        // Best competes against each of the others, in sample order.
        const auto winner = scratch.row(out.best_index);
        for (std::uint32_t j = 0; j < s; ++j) {
            if (j == out.best_index) continue;
            compete_and_update(v, winner, scratch.row(j));
        }
        out.updates_applied = true;
    }
    return out;
}

IterationResult cga_iteration(ProbabilityVector& v, const CgaParams& params,
                              const FitnessFunction& f, SplitRng& rng) {
    params.validate();
    CgaScratch scratch;
    const TurnOutcome out = run_turn(v, params, f, rng, scratch);
    IterationResult result;
    result.evaluations = out.evaluations;
    const auto best = scratch.row(out.best_index);
    result.best.genes.assign(best.begin(), best.end());
    result.best.fitness = out.best_fitness;
    return result;
}

}  // namespace pcga
