// Acceptance suite: the desk-scale reproduction of the reference experiments
// plus the exactness and robustness gates. Each criterion prints one
// [PASS]/[FAIL] line; the process exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <thread>
#include <vector>

#include "pcga/harness.hpp"
#include "pcga/net.hpp"
#include "pcga/sim.hpp"
#include "support.hpp"

using namespace pcga;

namespace {

constexpr std::uint64_t kBaseSeed = 42;
constexpr std::uint32_t kRepetitions = 10;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

unsigned parallelism() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : hw;
}

SimConfig paper_base() {
    SimConfig cfg;
    cfg.cga = {100000, 8, kBaseSeed};
    cfg.benchmark = make_benchmark("trap3x10", 0);
    cfg.max_total_evaluations = 100'000'000;
    return cfg;
}

std::vector<SweepRow> desk_sweep(std::uint64_t sync_interval) {
    SweepSpec spec;
    spec.worker_counts = {1, 2, 4, 8, 16, 32, 64, 128};
    spec.sync_intervals = {sync_interval};
    spec.repetitions = kRepetitions;
    spec.base = paper_base();
    spec.parallelism = parallelism();
    return run_sweep(spec);
}

std::string fit_to_string(const SlopeFit& fit) {
    std::ostringstream out;
    out << "slope=" << fit.slope << " r2=" << fit.r_squared << " points=" << fit.points;
    return out.str();
}

bool slope_criterion_holds(const SlopeFit& fit) {
    return fit.slope >= -1.15 && fit.slope <= -0.85 && fit.r_squared >= 0.98;
}

// --- criterion 7 helpers ----------------------------------------------------

std::uint64_t property_count_bounds(SplitRng& rng) {
    std::uint64_t checks = 0;
    const std::uint64_t n = 2 * (1 + rng.next_below(500));
    const auto length = static_cast<std::uint32_t>(1 + rng.next_below(16));
    const CgaParams params{n, static_cast<std::uint32_t>(2 + rng.next_below(7)),
                           rng.next_u64()};
    ProbabilityVector v = init_vector(params, length);
    SplitRng stream(params.seed);
    const auto f = make_onemax_benchmark(length);
    for (int op = 0; op < 12; ++op) {
        switch (stream.next_below(3)) {
            case 0: cga_iteration(v, params, f, stream); break;
            case 1: {
                const auto a = sample_individual(v, stream);
                const auto b = sample_individual(v, stream);
                compete_and_update(v, a, b);
                break;
            }
            default: {
                DeltaReport report;
                std::uint32_t gene = 0;
                while (gene < length) {
                    const auto delta = static_cast<std::int64_t>(stream.next_below(2 * n + 1)) -
                                       static_cast<std::int64_t>(n);
                    if (delta != 0) report.entries.push_back({gene, delta});
                    gene += 1 + static_cast<std::uint32_t>(stream.next_below(3));
                }
                merge_delta(v, report);
                break;
            }
        }
        for (const auto c : v.counts()) {
            if (c > n) throw std::logic_error("count escaped [0, N]");
            ++checks;
        }
    }
    return checks;
}

std::uint64_t property_codec_roundtrip(SplitRng& rng) {
    const auto v = testsupport::random_vector(rng, std::uint64_t(1) << 40, 4096);
    const auto packed = encode_counts(v);
    if (packed.size() != packed_counts_size(v.population_size(), v.length())) {
        throw std::logic_error("packed size mismatch");
    }
    const auto back = decode_counts(packed, v.population_size(), v.length());
    if (!(back == v)) throw std::logic_error("codec round-trip changed the vector");
    return 1;
}

std::uint64_t property_delta_merge(SplitRng& rng) {
    const auto snapshot = testsupport::random_vector(rng, 1 << 20, 128);
    auto local = snapshot;
    const auto steps = rng.next_below(80);
    for (std::uint64_t i = 0; i < steps; ++i) {
        local.add_clamped(static_cast<std::uint32_t>(rng.next_below(local.length())),
                          rng.next_below(2) ? 1 : -1);
    }
    auto merged = snapshot;
    merge_delta(merged, compute_delta(snapshot, local, steps));
    if (!(merged == local)) throw std::logic_error("delta/merge did not compose");
    return 1;
}

std::uint64_t property_frame_fuzz(SplitRng& rng) {
    std::vector<std::uint8_t> blob;
    if (rng.next_below(2)) {
        // Mutate a valid frame.
        Message msg = DeltaMsg{DeltaReport{{{1, 5}, {7, -2}}, rng.next_below(1000)},
                               static_cast<double>(rng.next_below(100))};
        blob = frame(msg);
        const auto flips = 1 + rng.next_below(6);
        for (std::uint64_t i = 0; i < flips; ++i) {
            blob[rng.next_below(blob.size())] ^=
                static_cast<std::uint8_t>(1 + rng.next_below(255));
        }
    } else {
        blob.resize(rng.next_below(128));
        for (auto& b : blob) b = static_cast<std::uint8_t>(rng.next_below(256));
    }
    try {
        (void)unframe(blob);
    } catch (const ProtocolError&) {
        // the required diagnostic path
    }
    return 1;
}

std::string metrics_blob(const RunMetrics& metrics) {
    std::ostringstream out;
    out << metrics.total_evaluations << '|' << metrics.solved << '|'
        << static_cast<int>(metrics.termination_reason) << '|' << metrics.blocks_solved << '|'
        << metrics.best_fitness_ever << '|';
    for (const auto e : metrics.evaluations_per_worker) out << e << ',';
    out << '|';
    for (const auto c : metrics.communication_steps_per_worker) out << c << ',';
    out << '|';
    const auto packed = encode_counts(metrics.final_manager_vector);
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
    return out.str();
}

std::uint64_t property_determinism(SplitRng& rng) {
    SimConfig cfg;
    cfg.workers = static_cast<std::uint32_t>(1 + rng.next_below(6));
    cfg.sync_interval = 1 + rng.next_below(64);
    cfg.cga = {2 * (1 + rng.next_below(100)), static_cast<std::uint32_t>(2 + rng.next_below(7)),
               rng.next_u64()};
    const auto length = static_cast<std::uint32_t>(1 + rng.next_below(14));
    cfg.benchmark = rng.next_below(2) ? make_onemax_benchmark(length)
                                      : make_trap_benchmark(TrapSpec{2, (length + 1) / 2, 0.7});
    cfg.max_total_evaluations = 50 + rng.next_below(2000);
    const auto first = metrics_blob(run_simulation(cfg));
    const auto second = metrics_blob(run_simulation(cfg));
    if (first != second) throw std::logic_error("two executions differed");
    return 1;
}

template <typename Property>
bool run_property(const char* name, Property&& property, std::uint64_t cases) {
    SplitRng rng(0x5EEDu ^ std::hash<std::string>{}(name));
    try {
        for (std::uint64_t i = 0; i < cases; ++i) property(rng);
    } catch (const std::exception& e) {
        std::printf("       property '%s' failed: %s\n", name, e.what());
        return false;
    }
    return true;
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    std::printf("acceptance suite: base seed %llu, %u replicates per cell, %u threads\n",
                static_cast<unsigned long long>(kBaseSeed), kRepetitions, parallelism());

    // Shared sweeps (criteria 1-4 all read from these).
    const auto rows_m8 = desk_sweep(8);
    const auto rows_m80 = desk_sweep(80);
    const auto rows_m80000 = desk_sweep(80000);

    // 1. Linear speedup at m=8.
    {
        const auto fit = fit_loglog_slope(rows_m8);
        report(1, "linear speedup at m=8", slope_criterion_holds(fit), fit_to_string(fit));
    }

    // 2. Communication steps scale with 1/m (m=8 vs m=80), 10 +/- 2.
    {
        bool pass = true;
        std::size_t compared = 0;
        std::ostringstream detail;
        for (const auto& row8 : rows_m8) {
            for (const auto& row80 : rows_m80) {
                if (row8.workers != row80.workers) continue;
                if (row8.solved_frac < 1.0 || row80.solved_frac < 1.0) continue;
                const double ratio = row8.comm_steps_mean / row80.comm_steps_mean;
                if (ratio < 8.0 || ratio > 12.0) pass = false;
                detail << "P" << row8.workers << "=" << ratio << " ";
                ++compared;
            }
        }
        if (compared == 0) pass = false;
        report(2, "communication-step scaling m=8 vs m=80", pass,
               compared == 0 ? "no fully solved P values" : detail.str());
    }

    // 3. Large-m degradation at m=80000.
    {
        const SweepRow* p128 = nullptr;
        for (const auto& row : rows_m80000) {
            if (row.workers == 128) p128 = &row;
        }
        bool comm_low = p128 != nullptr && p128->comm_steps_mean < 1.0;
        bool slope_broken = true;
        std::string fit_text = "fit impossible";
        try {
            const auto fit =
                fit_loglog_slope(rows_m80000, SweepField::evaluations_per_processor, true);
            slope_broken = !slope_criterion_holds(fit);
            fit_text = fit_to_string(fit);
        } catch (const std::invalid_argument&) {
        }
        std::ostringstream detail;
        detail << "comm/proc@P128=" << (p128 ? p128->comm_steps_mean : -1.0) << ", "
               << fit_text;
        report(3, "large-m degradation at m=80000", comm_low && slope_broken, detail.str());
    }

    // 4. Solution quality at P=1 (same cell as the m=8 sweep, per-run detail).
    {
        SimConfig cfg = paper_base();
        cfg.workers = 1;
        cfg.sync_interval = 8;
        const auto set = run_replicates(cfg, kRepetitions, {}, parallelism());
        std::uint32_t full = 0;
        double blocks_sum = 0.0;
        for (const auto& run : set.runs) {
            blocks_sum += run.blocks_solved;
            if (run.blocks_solved == 10) ++full;
        }
        const double blocks_mean = blocks_sum / kRepetitions;
        const double full_frac = static_cast<double>(full) / kRepetitions;
        std::ostringstream detail;
        detail << "mean blocks=" << blocks_mean << ", all-10 fraction=" << full_frac;
        report(4, "solution quality at P=1", blocks_mean >= 9.0 && full_frac >= 0.8,
               detail.str());
    }

    // 5. Model size: 1000 genes, N=10^6 -> exactly 2500 bytes.
    {
        const ProbabilityVector big(1'000'000, std::vector<std::uint64_t>(1000, 424242));
        const auto packed = encode_counts(big);
        const bool pass = packed.size() == 2500 && count_bit_width(1'000'000) == 20 &&
                          decode_counts(packed, 1'000'000, 1000) == big;
        std::ostringstream detail;
        detail << "payload=" << packed.size() << " bytes, width=" << count_bit_width(1'000'000)
               << " bits";
        report(5, "packed model size", pass, detail.str());
    }

    // 6. Oracle equivalence: simulator vs core loop, live stack vs simulator.
    {
        const std::uint32_t iterations = 10'000;
        CgaParams params{100000, 8, kBaseSeed};
        auto benchmark = make_benchmark("trap3x10", 0);
        benchmark.known_optimum.reset();  // run the full 10^4 iterations

        ProbabilityVector reference = init_vector(params, 30);
        SplitRng reference_rng = SplitRng(params.seed).derive(0);

        SimConfig cfg;
        cfg.workers = 1;
        cfg.sync_interval = 1'000'000'000'000ull;  // m >= cap: no transactions
        cfg.cga = params;
        cfg.benchmark = benchmark;
        cfg.max_total_evaluations = static_cast<std::uint64_t>(iterations) * 8;

        std::uint64_t equal_turns = 0;
        std::uint64_t turns = 0;
        cfg.observer = [&](const SimProbe& probe) {
            cga_iteration(reference, params, cfg.benchmark, reference_rng);
            ++turns;
            if (probe.local == reference) ++equal_turns;
        };
        const auto metrics = run_simulation(cfg);
        const bool sim_matches = turns == iterations && equal_turns == iterations &&
                                 metrics.total_evaluations == iterations * 8;

        // Live manager + one worker on loopback vs sim P=1, same seed,
        // convergence-terminated so both stop at the same merge.
        SimConfig live_cfg;
        live_cfg.workers = 1;
        live_cfg.sync_interval = 8;
        live_cfg.cga = {60, 2, 4242};
        live_cfg.benchmark = make_onemax_benchmark(12);
        live_cfg.benchmark.known_optimum.reset();
        live_cfg.max_total_evaluations = 10'000'000;
        const auto sim_metrics = run_simulation(live_cfg);

        net::ManagerOptions manager_options;
        manager_options.bind_address = "127.0.0.1:0";
        manager_options.cga = live_cfg.cga;
        manager_options.length = 12;
        net::ManagerService manager(std::move(manager_options));
        manager.start();
        net::WorkerOptions worker;
        worker.manager_address = "127.0.0.1:" + std::to_string(manager.port());
        worker.sync_interval = 8;
        worker.selection_rate = 2;
        worker.seed = 4242;
        worker.benchmark = [](std::uint32_t length) {
            auto f = make_onemax_benchmark(length);
            f.known_optimum.reset();
            return f;
        };
        const auto worker_report = net::worker_run(worker);
        const auto manager_vector = manager.stats().vector;
        manager.stop();

        const bool net_matches =
            worker_report.exit == net::WorkerExit::terminated_converged &&
            manager_vector == sim_metrics.final_manager_vector &&
            manager_vector.decode() == sim_metrics.final_manager_vector.decode();

        std::ostringstream detail;
        detail << "sim-vs-core equal turns " << equal_turns << "/" << iterations
               << ", net-vs-sim decoded models " << (net_matches ? "equal" : "DIFFER");
        report(6, "oracle equivalence", sim_matches && net_matches, detail.str());
    }

    // 7. Property suites, 10^4 randomized cases each.
    {
        const std::uint64_t cases = 10'000;
        const bool bounds = run_property("count-bounds", property_count_bounds, cases);
        const bool codec = run_property("codec-round-trip", property_codec_roundtrip, cases);
        const bool compose = run_property("delta-merge-composition", property_delta_merge, cases);
        const bool fuzz = run_property("frame-fuzz", property_frame_fuzz, cases);
        const bool determinism = run_property("determinism", property_determinism, cases);
        std::ostringstream detail;
        detail << "count-bounds=" << (bounds ? "ok" : "FAIL")
               << " codec=" << (codec ? "ok" : "FAIL")
               << " delta-merge=" << (compose ? "ok" : "FAIL")
               << " frame-fuzz=" << (fuzz ? "ok" : "FAIL")
               << " determinism=" << (determinism ? "ok" : "FAIL") << " (" << cases
               << " cases each)";
        report(7, "property suites", bounds && codec && compose && fuzz && determinism,
               detail.str());
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 7 criteria passed in %.1f s\n", 7 - failures, elapsed);
    return failures == 0 ? 0 : 1;
}
