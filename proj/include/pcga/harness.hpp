#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcga/sim.hpp"

namespace pcga {

/// One P x m grid of replicate sets over the simulator.
struct SweepSpec {
    std::vector<std::uint32_t> worker_counts;      // P values
    std::vector<std::uint64_t> sync_intervals;     // m values
    std::uint32_t repetitions = 1;
    SimConfig base;                                // seeds replicate r as base seed + r
    std::string output_path;                       // empty = no file
    unsigned parallelism = 1;

    void validate() const;
};

struct SweepRow {
    std::uint32_t workers = 0;
    std::uint64_t sync_interval = 0;
    std::uint32_t repetitions = 0;
    double evals_per_proc_mean = 0.0;
    double evals_per_proc_std = 0.0;
    double comm_steps_mean = 0.0;
    double comm_steps_std = 0.0;
    double solved_frac = 0.0;
    double blocks_mean = 0.0;
    bool operator==(const SweepRow&) const = default;
};

/// Runs every (P, m) cell, rows sorted by (m, P). Writes the CSV when the
/// spec carries an output path. Cells and replicates are pure functions of
/// the spec, so they may run on several threads; row order is fixed.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

inline constexpr const char* kSweepCsvHeader =
    "P,m,reps,evals_per_proc_mean,evals_per_proc_std,comm_steps_mean,comm_steps_std,"
    "solved_frac,blocks_mean";

/// Numeric fields are serialized with shortest-round-trip formatting, so
/// parsing an emitted CSV reproduces the rows exactly.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_csv(const std::string& path, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

std::vector<SweepRow> filter_rows_by_sync_interval(std::span<const SweepRow> rows,
                                                   std::uint64_t sync_interval);

enum class SweepField {
    evaluations_per_processor,
    communication_steps_per_processor,
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares on (ln P, ln mean-of-field) over rows that share
/// one m. Rows where not every replicate solved are excluded unless
/// `include_unsolved` is set. Needs >= 3 usable rows with positive means.
SlopeFit fit_loglog_slope(std::span<const SweepRow> rows,
                          SweepField field = SweepField::evaluations_per_processor,
                          bool include_unsolved = false);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plain-text `key = value` configuration (one pair per line, `#` comments).
/// Unknown keys are errors; parse errors cite line numbers; range violations
/// cite the key.
SweepSpec parse_sweep_spec(std::istream& in, const std::string& source_name);
SweepSpec load_sweep_spec(const std::string& path);

/// Same format restricted to a single simulation (workers and sync_interval
/// are scalars).
SimConfig parse_sim_config(std::istream& in, const std::string& source_name);
SimConfig load_sim_config(const std::string& path);

}  // namespace pcga
