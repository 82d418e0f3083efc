#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcga/benchmarks.hpp"
#include "pcga/cga.hpp"
#include "pcga/probability_vector.hpp"

namespace pcga {

enum class TerminationCause {
    optimum_sampled,
    manager_converged,
    eval_cap,
};

std::string to_string(TerminationCause cause);

/// Mid-run view handed to the optional observer: once right after a worker's
/// delta+update transaction (synced = true, local equals manager at that
/// instant) and once at the end of every worker turn (synced = false, the two
/// may legitimately differ).
struct SimProbe {
    std::uint64_t round;
    std::uint32_t worker;
    bool synced;
    const ProbabilityVector& local;
    const ProbabilityVector& manager;
    std::uint64_t total_evaluations;
};

using SimObserver = std::function<void(const SimProbe&)>;

struct SimConfig {
    std::uint32_t workers = 1;         // P
    std::uint64_t sync_interval = 8;   // m, evaluations between manager contacts
    CgaParams cga;
    FitnessFunction benchmark;
    std::uint64_t max_total_evaluations = 100'000'000;
    SimObserver observer;  // test/diagnostics hook; not part of run identity

    /// Throws on invalid values; returns non-fatal warnings.
    std::vector<std::string> validate() const;
};

struct RunMetrics {
    std::uint64_t total_evaluations = 0;
    std::vector<std::uint64_t> evaluations_per_worker;
    std::vector<std::uint64_t> communication_steps_per_worker;
    bool solved = false;
    TerminationCause termination_reason = TerminationCause::eval_cap;
    std::uint32_t blocks_solved = 0;
    double best_fitness_ever = 0.0;
    ProbabilityVector final_manager_vector;

    double evaluations_per_processor() const {
        return static_cast<double>(total_evaluations) /
               static_cast<double>(evaluations_per_worker.size());
    }
    double communication_steps_per_processor() const;
};

/// Deterministic serial simulation of P lockstep workers plus one manager.
/// Strict round-robin scheduling; each turn is one tournament round
/// (s evaluations). A worker that crossed m evaluations since its last sync
/// opens its next turn with one delta+update transaction and then samples
/// from the freshly received vector; a run can therefore end with some
/// workers' reports never delivered. The whole run is a pure function of the
/// config.
RunMetrics run_simulation(const SimConfig& config);

using SeedSchedule = std::function<std::uint64_t(std::uint32_t)>;

struct ReplicateAggregate {
    std::uint32_t repetitions = 0;
    double evals_per_proc_mean = 0.0;
    double evals_per_proc_std = 0.0;
    double comm_steps_mean = 0.0;
    double comm_steps_std = 0.0;
    double solved_fraction = 0.0;
    double blocks_mean = 0.0;
};

struct ReplicateSet {
    std::vector<RunMetrics> runs;
    ReplicateAggregate aggregate;
};

ReplicateAggregate aggregate_metrics(const std::vector<RunMetrics>& runs);

/// Runs `repetitions` independent simulations; replicate r uses master seed
/// schedule(r), defaulting to base.cga.seed + r. Replicates are pure
/// functions of their config, so they may execute on up to `parallelism`
/// threads; results and aggregates are ordered by replicate index either way.
ReplicateSet run_replicates(const SimConfig& base, std::uint32_t repetitions,
                            SeedSchedule schedule = {}, unsigned parallelism = 1);

}  // namespace pcga
