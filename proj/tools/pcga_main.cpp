#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcga/harness.hpp"
#include "pcga/net.hpp"

namespace {

void print_line(const std::string& line) { std::cout << line << "\n" << std::flush; }

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

struct ManagerArgs {
    std::string bind = "127.0.0.1:7700";
    std::uint32_t length = 30;
    std::uint64_t pop_size = 100000;
    std::uint32_t selection = 8;
    std::string benchmark = "trap3x10";
    std::string checkpoint;
    double checkpoint_every = 30.0;
    std::uint64_t eval_cap = 0;  // 0 = unlimited
    double target_fitness = 0.0;
    bool target_given = false;
    double linger = 3.0;
};

int run_manager(const ManagerArgs& args) {
    pcga::net::ManagerOptions options;
    options.bind_address = args.bind;
    options.cga.population_size = args.pop_size;
    options.cga.selection_rate = args.selection;
    options.length = args.length;
    options.log = print_line;

    const pcga::FitnessFunction benchmark = pcga::make_benchmark(args.benchmark, args.length);
    if (benchmark.length != args.length) {
        throw std::invalid_argument("benchmark length mismatch");
    }
    options.policy.target_fitness =
        args.target_given ? std::optional<double>(args.target_fitness) : benchmark.known_optimum;
    if (args.eval_cap > 0) options.policy.max_total_evaluations = args.eval_cap;

    if (!args.checkpoint.empty()) {
        options.checkpoint_path = args.checkpoint;
        options.checkpoint_every_seconds = args.checkpoint_every;
        std::ifstream existing(args.checkpoint, std::ios::binary);
        if (existing.good()) {
            options.initial_vector = pcga::net::load_vector_checkpoint(args.checkpoint);
        }
    }

    pcga::net::ManagerService manager(std::move(options));
    manager.serve(args.linger);

    const auto stats = manager.stats();
    const auto decoded = stats.vector.decode();
    std::cout << "evt=final status=" << pcga::net::to_string(stats.status)
              << " merges=" << stats.merges_applied << " clamps=" << stats.clamp_events
              << " evals=" << stats.total_reported_evaluations
              << " best=" << stats.best_fitness_reported
              << " blocks=" << (benchmark.solved_blocks ? benchmark.solved_blocks(decoded) : 0)
              << "\n";
    return 0;
}

struct WorkerArgs {
    std::string manager = "127.0.0.1:7700";
    std::uint64_t sync_interval = 8;
    std::uint64_t seed = 1;
    std::uint32_t selection = 8;
    std::string benchmark = "trap3x10";
    std::uint32_t max_retries = 10;
};

int run_worker(const WorkerArgs& args) {
    pcga::net::WorkerOptions options;
    options.manager_address = args.manager;
    options.sync_interval = args.sync_interval;
    options.selection_rate = args.selection;
    options.seed = args.seed;
    options.max_connect_attempts = args.max_retries;
    options.log = print_line;
    const std::string benchmark_name = args.benchmark;
    options.benchmark = [benchmark_name](std::uint32_t length) {
        return pcga::make_benchmark(benchmark_name, length);
    };
    if (args.sync_interval < args.selection) {
        std::cerr << "warning: sync interval m=" << args.sync_interval
                  << " is below the selection rate s=" << args.selection
                  << "; one tournament round already performs s evaluations\n";
    }

    const auto report = pcga::net::worker_run(options);
    std::cout << "evt=final exit=" << pcga::net::to_string(report.exit)
              << " evals=" << report.evaluations << " transactions=" << report.transactions
              << " best=" << report.best_fitness << "\n";
    return report.exit == pcga::net::WorkerExit::connection_lost ? 1 : 0;
}

struct SweepArgs {
    std::string config;
    std::string out;
    unsigned parallel = 0;
    bool out_given = false;
    bool parallel_given = false;
};

int run_sweep_command(const SweepArgs& args) {
    std::string config_path = args.config;
    if (config_path.empty()) {
        if (const auto env = env_value("PCGA_CONFIG")) config_path = *env;
    }
    if (config_path.empty()) {
        throw pcga::ConfigError("sweep needs --config (or PCGA_CONFIG)");
    }
    pcga::SweepSpec spec = pcga::load_sweep_spec(config_path);

    // Precedence: command line, then config file, then environment.
    if (args.out_given) {
        spec.output_path = args.out;
    } else if (spec.output_path.empty()) {
        spec.output_path = env_value("PCGA_OUT").value_or("sweep.csv");
    }
    if (args.parallel_given) {
        spec.parallelism = args.parallel;
    } else if (spec.parallelism == 0) {
        if (const auto env = env_value("PCGA_PARALLEL")) {
            spec.parallelism = static_cast<unsigned>(std::stoul(*env));
        } else {
            spec.parallelism = 1;
        }
    }

    {
        pcga::SimConfig probe = spec.base;
        probe.sync_interval = *std::min_element(spec.sync_intervals.begin(),
                                                spec.sync_intervals.end());
        for (const auto& warning : probe.validate()) {
            std::cerr << "warning: " << warning << "\n";
        }
    }

    const auto rows = pcga::run_sweep(spec);
    for (const auto& row : rows) {
        std::cout << "P=" << row.workers << " m=" << row.sync_interval
                  << " evals/proc=" << row.evals_per_proc_mean
                  << " comm/proc=" << row.comm_steps_mean << " solved=" << row.solved_frac
                  << " blocks=" << row.blocks_mean << "\n";
    }
    std::cout << "wrote " << spec.output_path << " (" << rows.size() << " rows)\n";
    return 0;
}

struct AnalyzeArgs {
    std::string csv;
    std::uint64_t sync_interval = 8;
    std::string field = "evals";
    bool include_unsolved = false;
};

int run_analyze(const AnalyzeArgs& args) {
    const auto rows = pcga::read_sweep_csv(args.csv);
    const auto filtered = pcga::filter_rows_by_sync_interval(rows, args.sync_interval);
    if (filtered.empty()) {
        throw std::runtime_error("no rows with m=" + std::to_string(args.sync_interval) +
                                 " in " + args.csv);
    }
    const auto field = args.field == "comm"
                           ? pcga::SweepField::communication_steps_per_processor
                           : pcga::SweepField::evaluations_per_processor;
    const auto fit = pcga::fit_loglog_slope(filtered, field, args.include_unsolved);
    std::cout << "m=" << args.sync_interval << " field=" << args.field
              << " points=" << fit.points << " slope=" << fit.slope
              << " intercept=" << fit.intercept << " r2=" << fit.r_squared << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Massively parallelizable compact GA: manager/worker deployment, "
                 "deterministic serial simulator, and experiment harness"};
    app.require_subcommand(1);

    ManagerArgs manager_args;
    auto* manager = app.add_subcommand("manager", "Serve the authoritative probability vector");
    manager->add_option("--bind", manager_args.bind, "Bind address host:port (port 0 = ephemeral)")
        ->envname("PCGA_BIND");
    manager->add_option("--length", manager_args.length, "Chromosome length")
        ->envname("PCGA_LENGTH");
    manager->add_option("--pop-size", manager_args.pop_size, "Simulated population size (even)")
        ->envname("PCGA_POP_SIZE");
    manager->add_option("--selection", manager_args.selection, "Tournament size s")
        ->envname("PCGA_SELECTION");
    manager->add_option("--benchmark", manager_args.benchmark, "Benchmark name (for the solve target)")
        ->envname("PCGA_BENCHMARK");
    manager->add_option("--checkpoint", manager_args.checkpoint,
                        "Vector checkpoint file (loaded on start when present)")
        ->envname("PCGA_CHECKPOINT");
    manager->add_option("--checkpoint-every", manager_args.checkpoint_every,
                        "Seconds between checkpoints")
        ->envname("PCGA_CHECKPOINT_EVERY");
    manager->add_option("--eval-cap", manager_args.eval_cap,
                        "Stop after this many reported evaluations (0 = unlimited)")
        ->envname("PCGA_EVAL_CAP");
    auto* target_opt = manager->add_option("--target-fitness", manager_args.target_fitness,
                                           "Solve threshold (default: benchmark optimum)")
                           ->envname("PCGA_TARGET_FITNESS");
    manager->add_option("--linger", manager_args.linger,
                        "Seconds to keep answering TERMINATE after finishing")
        ->envname("PCGA_LINGER");

    WorkerArgs worker_args;
    auto* worker = app.add_subcommand("worker", "Run one compact GA worker against a manager");
    worker->add_option("--manager", worker_args.manager, "Manager address host:port")
        ->envname("PCGA_MANAGER");
    worker->add_option("--sync-interval", worker_args.sync_interval,
                       "Evaluations between manager contacts (m)")
        ->envname("PCGA_SYNC_INTERVAL");
    worker->add_option("--seed", worker_args.seed, "Random stream seed")->envname("PCGA_SEED");
    worker->add_option("--selection", worker_args.selection, "Tournament size s")
        ->envname("PCGA_SELECTION");
    worker->add_option("--benchmark", worker_args.benchmark, "Benchmark name")
        ->envname("PCGA_BENCHMARK");
    worker->add_option("--max-retries", worker_args.max_retries,
                       "Reconnect attempts before giving up")
        ->envname("PCGA_MAX_RETRIES");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run a P x m sweep over the serial simulator");
    auto* config_opt = sweep->add_option("--config", sweep_args.config, "Sweep config file");
    auto* out_opt = sweep->add_option("--out", sweep_args.out, "Output CSV path");
    auto* parallel_opt = sweep->add_option("--parallel", sweep_args.parallel,
                                           "Worker threads for sweep cells");

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "Log-log slope of a sweep CSV");
    analyze->add_option("--csv", analyze_args.csv, "Sweep CSV path")
        ->required()
        ->envname("PCGA_CSV");
    analyze->add_option("--m", analyze_args.sync_interval, "Sync interval to analyze")
        ->envname("PCGA_M");
    analyze->add_option("--field", analyze_args.field, "evals (default) or comm")
        ->check(CLI::IsMember({"evals", "comm"}))
        ->envname("PCGA_FIELD");
    analyze->add_flag("--include-unsolved", analyze_args.include_unsolved,
                      "Keep rows where not every replicate solved");

    CLI11_PARSE(app, argc, argv);

    try {
        if (manager->parsed()) {
            manager_args.target_given = target_opt->count() > 0;
            return run_manager(manager_args);
        }
        if (worker->parsed()) return run_worker(worker_args);
        if (sweep->parsed()) {
            sweep_args.out_given = out_opt->count() > 0;
            sweep_args.parallel_given = parallel_opt->count() > 0;
            (void)config_opt;
            return run_sweep_command(sweep_args);
        }
        if (analyze->parsed()) return run_analyze(analyze_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
