#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcga/harness.hpp"
#include "support.hpp"

using namespace pcga;

namespace {

SweepSpec tiny_spec() {
    SweepSpec spec;
    spec.worker_counts = {1, 2};
    spec.sync_intervals = {16, 8};
    spec.repetitions = 3;
    spec.base.cga = {100, 2, 900};
    spec.base.benchmark = make_onemax_benchmark(8);
    spec.base.max_total_evaluations = 1'000'000;
    return spec;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("slope fit recovers exact power laws") {
    std::vector<SweepRow> rows;
    for (const std::uint32_t p : {1u, 2u, 4u, 8u, 16u}) {
        SweepRow row;
        row.workers = p;
        row.sync_interval = 8;
        row.repetitions = 1;
        row.evals_per_proc_mean = 1.0e6 / p;  // exactly C/P
        row.comm_steps_mean = 42.0;           // exactly constant
        row.solved_frac = 1.0;
        rows.push_back(row);
    }

    const auto inverse = fit_loglog_slope(rows);
    CHECK(inverse.slope == doctest::Approx(-1.0));
    CHECK(inverse.r_squared == doctest::Approx(1.0));
    CHECK(inverse.intercept == doctest::Approx(std::log(1.0e6)));
    CHECK(inverse.points == 5);

    const auto flat =
        fit_loglog_slope(rows, SweepField::communication_steps_per_processor);
    CHECK(flat.slope == doctest::Approx(0.0));

    // Unsolved rows are excluded by default, included on demand.
    rows[4].solved_frac = 0.5;
    CHECK(fit_loglog_slope(rows).points == 4);
    CHECK(fit_loglog_slope(rows, SweepField::evaluations_per_processor, true).points == 5);

    rows.resize(2);
    CHECK_THROWS_AS(fit_loglog_slope(rows), std::invalid_argument);

    std::vector<SweepRow> zero(4);
    for (std::uint32_t i = 0; i < 4; ++i) {
        zero[i].workers = 1u << i;
        zero[i].solved_frac = 1.0;
        zero[i].evals_per_proc_mean = 0.0;
    }
    CHECK_THROWS_AS(fit_loglog_slope(zero), std::invalid_argument);
}

TEST_CASE("a one-cell sweep equals its replicate aggregate") {
    SweepSpec spec = tiny_spec();
    spec.worker_counts = {2};
    spec.sync_intervals = {8};
    SimConfig cell = spec.base;
    cell.workers = 2;
    cell.sync_interval = 8;
    const auto expected = run_replicates(cell, spec.repetitions).aggregate;

    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].workers == 2);
    CHECK(rows[0].sync_interval == 8);
    CHECK(rows[0].repetitions == 3);
    CHECK(rows[0].evals_per_proc_mean == expected.evals_per_proc_mean);
    CHECK(rows[0].evals_per_proc_std == expected.evals_per_proc_std);
    CHECK(rows[0].comm_steps_mean == expected.comm_steps_mean);
    CHECK(rows[0].solved_frac == expected.solved_fraction);
    CHECK(rows[0].blocks_mean == expected.blocks_mean);
}

TEST_CASE("sweep rows are sorted by (m, P) and reproduce byte-identically") {
    TempFile csv_a("pcga_sweep_a.csv");
    TempFile csv_b("pcga_sweep_b.csv");

    SweepSpec spec = tiny_spec();
    spec.output_path = csv_a.path;
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].sync_interval == 8);
    CHECK(rows[0].workers == 1);
    CHECK(rows[1].sync_interval == 8);
    CHECK(rows[1].workers == 2);
    CHECK(rows[2].sync_interval == 16);
    CHECK(rows[3].sync_interval == 16);

    // Parallel cells, same bytes.
    spec.output_path = csv_b.path;
    spec.parallelism = 4;
    run_sweep(spec);

    std::ifstream a(csv_a.path, std::ios::binary);
    std::ifstream b(csv_b.path, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                              std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
    CHECK(bytes_a.rfind(kSweepCsvHeader, 0) == 0);

    // Round-trip parses back to the exact same rows.
    const auto parsed = read_sweep_csv(csv_a.path);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i] == rows[i]);
    }
}

TEST_CASE("csv writer round-trips doubles exactly") {
    std::vector<SweepRow> rows(1);
    rows[0].workers = 3;
    rows[0].sync_interval = 7;
    rows[0].repetitions = 2;
    rows[0].evals_per_proc_mean = 1.0 / 3.0;
    rows[0].evals_per_proc_std = 1e-17;
    rows[0].comm_steps_mean = 123456789.123456789;
    rows[0].comm_steps_std = 0.1 + 0.2;  // famously not 0.3
    rows[0].solved_frac = 2.0 / 3.0;
    rows[0].blocks_mean = 9.999999999999998;

    std::ostringstream out;
    write_sweep_csv(out, rows);
    std::istringstream in(out.str());
    const auto parsed = read_sweep_csv(in);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == rows[0]);
}

TEST_CASE("communication shrinks tenfold from m=8 to m=80") {
    SweepSpec spec;
    spec.worker_counts = {2};
    spec.sync_intervals = {8, 80};
    spec.repetitions = 5;
    spec.base.cga = {2000, 8, 4242};
    spec.base.benchmark = make_onemax_benchmark(24);
    spec.base.max_total_evaluations = 10'000'000;

    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].solved_frac == 1.0);
    REQUIRE(rows[1].solved_frac == 1.0);
    const double ratio = rows[0].comm_steps_mean / rows[1].comm_steps_mean;
    CHECK(ratio > 8.0);
    CHECK(ratio < 12.0);
}

TEST_CASE("config loader accepts the reference experiment") {
    std::istringstream in(
        "# reference configuration\n"
        "pop_size = 100000\n"
        "selection = 8\n"
        "benchmark = trap3x10\n"
        "workers = 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024\n"
        "sync_intervals = 8, 80, 800, 8000, 80000\n"
        "repetitions = 30\n"
        "seed = 1\n"
        "eval_cap = 200000000\n"
        "out = full.csv\n");
    const auto spec = parse_sweep_spec(in, "test");
    CHECK(spec.base.cga.population_size == 100000);
    CHECK(spec.base.cga.selection_rate == 8);
    CHECK(spec.base.benchmark.name == "trap3x10");
    CHECK(spec.base.benchmark.length == 30);
    CHECK(spec.worker_counts.size() == 11);
    CHECK(spec.sync_intervals.size() == 5);
    CHECK(spec.repetitions == 30);
    CHECK(spec.output_path == "full.csv");
    CHECK(spec.worker_counts.size() * spec.sync_intervals.size() == 55);
}

TEST_CASE("config loader errors cite lines, keys, and requirements") {
    std::istringstream empty("");
    try {
        parse_sweep_spec(empty, "empty.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("required keys") != std::string::npos);
        CHECK(what.find("pop_size") != std::string::npos);
        CHECK(what.find("sync_intervals") != std::string::npos);
    }

    std::istringstream odd(
        "pop_size = 99999\nselection = 8\nbenchmark = trap3x10\n"
        "workers = 1\nsync_intervals = 8\nrepetitions = 1\n");
    try {
        parse_sweep_spec(odd, "odd.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("pop_size") != std::string::npos);
        CHECK(what.find("even") != std::string::npos);
    }

    std::istringstream unknown(
        "pop_size = 100\nselection = 2\nbenchmark = onemax\nlength = 8\n"
        "workers = 1\nsync_intervals = 8\nrepetitions = 1\npopsize = 3\n");
    try {
        parse_sweep_spec(unknown, "unknown.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("unknown key 'popsize'") != std::string::npos);
        CHECK(what.find("line 8") != std::string::npos);
    }

    std::istringstream garbled("pop_size\n");
    try {
        parse_sweep_spec(garbled, "garbled.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("line 1") != std::string::npos);
    }

    std::istringstream bad_number(
        "pop_size = friday\nselection = 2\nbenchmark = onemax\nlength = 8\n"
        "workers = 1\nsync_intervals = 8\nrepetitions = 1\n");
    CHECK_THROWS_AS(parse_sweep_spec(bad_number, "bad.conf"), ConfigError);

    CHECK_THROWS_AS(load_sweep_spec("/nonexistent/path.conf"), ConfigError);
}

TEST_CASE("single-run configs load too") {
    std::istringstream in(
        "pop_size = 100\nselection = 2\nbenchmark = onemax\nlength = 8\n"
        "workers = 4\nsync_interval = 16\nseed = 3\n");
    const auto cfg = parse_sim_config(in, "run.conf");
    CHECK(cfg.workers == 4);
    CHECK(cfg.sync_interval == 16);
    CHECK(cfg.cga.seed == 3);
    CHECK(cfg.benchmark.length == 8);
}
