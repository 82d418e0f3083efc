#include "pcga/sim.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "pcga/protocol.hpp"

namespace pcga {

std::string to_string(TerminationCause cause) {
    switch (cause) {
        case TerminationCause::optimum_sampled: return "optimum-sampled";
        case TerminationCause::manager_converged: return "manager-converged";
        case TerminationCause::eval_cap: return "eval-cap";
    }
    return "unknown";
}

double RunMetrics::communication_steps_per_processor() const {
    std::uint64_t total = 0;
    for (const auto steps : communication_steps_per_worker) total += steps;
    return static_cast<double>(total) /
           static_cast<double>(communication_steps_per_worker.size());
}

std::vector<std::string> SimConfig::validate() const {
    cga.validate();
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
    if (sync_interval < 1) throw std::invalid_argument("sync interval must be >= 1");
    if (max_total_evaluations < 1) throw std::invalid_argument("evaluation cap must be >= 1");
    if (!benchmark.evaluate || benchmark.length == 0) {
        throw std::invalid_argument("simulation needs a benchmark");
    }
    std::vector<std::string> warnings;
    if (sync_interval < cga.selection_rate) {
        warnings.push_back("sync interval m=" + std::to_string(sync_interval) +
                           " is below the selection rate s=" +
                           std::to_string(cga.selection_rate) +
                           "; one tournament round already performs s evaluations");
    }
    return warnings;
}

namespace {

struct SimWorker {
    ProbabilityVector snapshot;
    ProbabilityVector local;
    SplitRng rng;
    std::uint64_t evals_since_sync = 0;
};

}  // namespace

RunMetrics run_simulation(const SimConfig& config) {
    config.validate();
    const auto& f = config.benchmark;
    const std::uint32_t worker_count = config.workers;
    const std::uint64_t cap = config.max_total_evaluations;

    ProbabilityVector manager = init_vector(config.cga, f.length);
    const SplitRng master(config.cga.seed);
    std::vector<SimWorker> workers;
    workers.reserve(worker_count);
    for (std::uint32_t w = 0; w < worker_count; ++w) {
        // Steps 2-3 of the exchange: each worker starts from a snapshot of
        // the manager vector and owns a stream derived from (seed, w).
        workers.push_back({manager, manager, master.derive(w), 0});
    }

    RunMetrics metrics;
    metrics.evaluations_per_worker.assign(worker_count, 0);
    metrics.communication_steps_per_worker.assign(worker_count, 0);
    metrics.best_fitness_ever = -std::numeric_limits<double>::infinity();

    CgaScratch scratch;
    bool done = false;
    for (std::uint64_t round = 0; !done; ++round) {
        for (std::uint32_t w = 0; w < worker_count && !done; ++w) {
            SimWorker& worker = workers[w];

            // A worker that crossed m evaluations in its previous turn opens
            // this turn with the transaction (steps 5-7): report differences,
            // merge, adopt the refreshed full vector, then resume sampling
            // from it. Workers whose transaction never comes before the run
            // ends simply lose that report.
            if (worker.evals_since_sync >= config.sync_interval) {
                const DeltaReport report =
                    compute_delta(worker.snapshot, worker.local, worker.evals_since_sync);
                merge_delta(manager, report);
                worker.snapshot = manager;
                worker.local = manager;
                worker.evals_since_sync = 0;
                ++metrics.communication_steps_per_worker[w];
                if (config.observer) {
                    config.observer(SimProbe{round, w, true, worker.local, manager,
                                             metrics.total_evaluations});
                }
                if (manager.converged()) {
                    metrics.termination_reason = TerminationCause::manager_converged;
                    done = true;
                    break;
                }
            }

            TurnLimits limits;
            limits.stop_at_fitness = f.known_optimum;
            limits.max_evaluations = cap - metrics.total_evaluations;
            const TurnOutcome turn =
                run_turn(worker.local, config.cga, f, worker.rng, scratch, limits);

            metrics.total_evaluations += turn.evaluations;
            metrics.evaluations_per_worker[w] += turn.evaluations;
            worker.evals_since_sync += turn.evaluations;
            if (turn.best_fitness > metrics.best_fitness_ever) {
                metrics.best_fitness_ever = turn.best_fitness;
            }

            // Termination checks in priority order; counting stopped inside
            // the turn at the triggering evaluation.
            if (turn.hit_stop_fitness) {
                metrics.solved = true;
                metrics.termination_reason = TerminationCause::optimum_sampled;
                done = true;
            } else if (metrics.total_evaluations >= cap) {
                metrics.termination_reason = TerminationCause::eval_cap;
                done = true;
            }

            if (config.observer) {
                config.observer(SimProbe{round, w, false, worker.local, manager,
                                         metrics.total_evaluations});
            }
        }
    }

    const auto decoded = manager.decode();
    metrics.blocks_solved = f.solved_blocks ? f.solved_blocks(decoded) : 0;
    if (metrics.termination_reason == TerminationCause::manager_converged &&
        f.known_optimum && f.evaluate(decoded) >= *f.known_optimum) {
        metrics.solved = true;
    }
    metrics.final_manager_vector = std::move(manager);
    return metrics;
}

ReplicateAggregate aggregate_metrics(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
    ReplicateAggregate agg;
    agg.repetitions = static_cast<std::uint32_t>(runs.size());
    const double n = static_cast<double>(runs.size());

    double evals_sum = 0.0;
    double comm_sum = 0.0;
    double blocks_sum = 0.0;
    double solved_sum = 0.0;
    for (const auto& run : runs) {
        evals_sum += run.evaluations_per_processor();
        comm_sum += run.communication_steps_per_processor();
        blocks_sum += static_cast<double>(run.blocks_solved);
        solved_sum += run.solved ? 1.0 : 0.0;
    }
    agg.evals_per_proc_mean = evals_sum / n;
    agg.comm_steps_mean = comm_sum / n;
    agg.blocks_mean = blocks_sum / n;
    agg.solved_fraction = solved_sum / n;

    if (runs.size() > 1) {
        double evals_sq = 0.0;
        double comm_sq = 0.0;
        for (const auto& run : runs) {
            const double de = run.evaluations_per_processor() - agg.evals_per_proc_mean;
            const double dc = run.communication_steps_per_processor() - agg.comm_steps_mean;
            evals_sq += de * de;
            comm_sq += dc * dc;
        }
        agg.evals_per_proc_std = std::sqrt(evals_sq / (n - 1.0));
        agg.comm_steps_std = std::sqrt(comm_sq / (n - 1.0));
    }
    return agg;
}

ReplicateSet run_replicates(const SimConfig& base, std::uint32_t repetitions,
                            SeedSchedule schedule, unsigned parallelism) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (!schedule) {
        const std::uint64_t base_seed = base.cga.seed;
        schedule = [base_seed](std::uint32_t r) { return base_seed + r; };
    }

    ReplicateSet set;
    set.runs.resize(repetitions);
    const unsigned threads = std::max(1u, std::min(parallelism, repetitions));
    if (threads == 1) {
        for (std::uint32_t r = 0; r < repetitions; ++r) {
            SimConfig cfg = base;
            cfg.cga.seed = schedule(r);
            set.runs[r] = run_simulation(cfg);
        }
    } else {
        std::atomic<std::uint32_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::uint32_t r = next.fetch_add(1);
                    if (r >= repetitions) return;
                    SimConfig cfg = base;
                    cfg.cga.seed = schedule(r);
                    set.runs[r] = run_simulation(cfg);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    set.aggregate = aggregate_metrics(set.runs);
    return set;
}

}  // namespace pcga
