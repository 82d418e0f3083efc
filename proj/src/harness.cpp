#include "pcga/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace pcga {

void SweepSpec::validate() const {
    if (worker_counts.empty()) throw std::invalid_argument("sweep needs at least one P value");
    if (sync_intervals.empty()) throw std::invalid_argument("sweep needs at least one m value");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    SimConfig probe = base;
    probe.workers = worker_counts.front();
    probe.sync_interval = sync_intervals.front();
    probe.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();

    struct Cell {
        std::uint32_t workers;
        std::uint64_t sync_interval;
    };
    std::vector<Cell> cells;
    for (const auto m : spec.sync_intervals) {
        for (const auto p : spec.worker_counts) {
            cells.push_back({p, m});
        }
    }

    std::vector<SweepRow> rows(cells.size());
    const auto run_cell = [&](std::size_t index) {
        SimConfig cfg = spec.base;
        cfg.workers = cells[index].workers;
        cfg.sync_interval = cells[index].sync_interval;
        // Replicates inside a cell run serially here; parallelism is spent
        // across cells, which is where the work is.
        const ReplicateSet set = run_replicates(cfg, spec.repetitions);
        const auto& agg = set.aggregate;
        rows[index] = SweepRow{cells[index].workers,
                               cells[index].sync_interval,
                               spec.repetitions,
                               agg.evals_per_proc_mean,
                               agg.evals_per_proc_std,
                               agg.comm_steps_mean,
                               agg.comm_steps_std,
                               agg.solved_fraction,
                               agg.blocks_mean};
    };

    const unsigned threads =
        std::max(1u, std::min<unsigned>(spec.parallelism, static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size()) return;
                    run_cell(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.sync_interval != b.sync_interval) return a.sync_interval < b.sync_interval;
        return a.workers < b.workers;
    });

    if (!spec.output_path.empty()) {
        write_sweep_csv(spec.output_path, rows);
    }
    return rows;
}

namespace {

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

double parse_double_field(const std::string& text, int line) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        throw ConfigError("csv line " + std::to_string(line) + ": bad numeric field '" +
                          text + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.workers << ',' << row.sync_interval << ',' << row.repetitions << ','
            << format_double(row.evals_per_proc_mean) << ','
            << format_double(row.evals_per_proc_std) << ','
            << format_double(row.comm_steps_mean) << ','
            << format_double(row.comm_steps_std) << ','
            << format_double(row.solved_frac) << ','
            << format_double(row.blocks_mean) << '\n';
    }
}

void write_sweep_csv(const std::string& path, std::span<const SweepRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_sweep_csv(out, rows);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepCsvHeader) {
        throw ConfigError("csv header mismatch: got '" + line + "'");
    }
    std::vector<SweepRow> rows;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 9) {
            throw ConfigError("csv line " + std::to_string(line_number) + ": expected 9 fields");
        }
        SweepRow row;
        row.workers = static_cast<std::uint32_t>(parse_double_field(fields[0], line_number));
        row.sync_interval =
            static_cast<std::uint64_t>(parse_double_field(fields[1], line_number));
        row.repetitions = static_cast<std::uint32_t>(parse_double_field(fields[2], line_number));
        row.evals_per_proc_mean = parse_double_field(fields[3], line_number);
        row.evals_per_proc_std = parse_double_field(fields[4], line_number);
        row.comm_steps_mean = parse_double_field(fields[5], line_number);
        row.comm_steps_std = parse_double_field(fields[6], line_number);
        row.solved_frac = parse_double_field(fields[7], line_number);
        row.blocks_mean = parse_double_field(fields[8], line_number);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_sweep_csv(in);
}

std::vector<SweepRow> filter_rows_by_sync_interval(std::span<const SweepRow> rows,
                                                   std::uint64_t sync_interval) {
    std::vector<SweepRow> out;
    for (const auto& row : rows) {
        if (row.sync_interval == sync_interval) out.push_back(row);
    }
    return out;
}

SlopeFit fit_loglog_slope(std::span<const SweepRow> rows, SweepField field,
                          bool include_unsolved) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& row : rows) {
        if (!include_unsolved && row.solved_frac < 1.0) continue;
        const double mean = field == SweepField::evaluations_per_processor
                                ? row.evals_per_proc_mean
                                : row.comm_steps_mean;
        if (!(mean > 0.0)) {
            throw std::invalid_argument("log-log fit needs positive means (P=" +
                                        std::to_string(row.workers) + ")");
        }
        xs.push_back(std::log(static_cast<double>(row.workers)));
        ys.push_back(std::log(mean));
    }
    if (xs.size() < 3) {
        throw std::invalid_argument("log-log fit needs at least 3 rows, have " +
                                    std::to_string(xs.size()));
    }

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("log-log fit needs at least two distinct P values");
    }
    SlopeFit fit;
    fit.points = xs.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// ---------------------------------------------------------------------------
// key = value configuration
// ---------------------------------------------------------------------------

namespace {

struct KvEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

class KvFile {
public:
    KvFile(std::istream& in, const std::string& source) : source_(source) {
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(source_ + " line " + std::to_string(number) +
                                  ": expected 'key = value'");
            }
            const std::string key = std::string(trim(trimmed.substr(0, eq)));
            const std::string value = std::string(trim(trimmed.substr(eq + 1)));
            if (key.empty()) {
                throw ConfigError(source_ + " line " + std::to_string(number) + ": empty key");
            }
            if (entries_.count(key)) {
                throw ConfigError(source_ + " line " + std::to_string(number) +
                                  ": duplicate key '" + key + "'");
            }
            entries_[key] = {value, number, false};
        }
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
        const auto raw = take(key);
        if (!raw) return fallback;
        return parse_u64(key, *raw);
    }

    std::uint64_t require_u64(const std::string& key) {
        const auto raw = take(key);
        if (!raw) missing(key);
        return parse_u64(key, *raw);
    }

    std::string require_string(const std::string& key) {
        const auto raw = take(key);
        if (!raw) missing(key);
        return *raw;
    }

    double take_double(const std::string& key, double fallback) {
        const auto raw = take(key);
        if (!raw) return fallback;
        double value = 0.0;
        const auto* begin = raw->data();
        const auto* end = begin + raw->size();
        const auto result = std::from_chars(begin, end, value);
        if (result.ec != std::errc() || result.ptr != end) {
            throw ConfigError(source_ + ": key '" + key + "': bad number '" + *raw + "'");
        }
        return value;
    }

    std::vector<std::uint64_t> require_u64_list(const std::string& key) {
        const auto raw = take(key);
        if (!raw) missing(key);
        std::vector<std::uint64_t> values;
        for (const auto& part : split_list(*raw)) {
            values.push_back(parse_u64(key, part));
        }
        if (values.empty()) {
            throw ConfigError(source_ + ": key '" + key + "': empty list");
        }
        return values;
    }

    void set_required(std::vector<std::string> keys) { required_ = std::move(keys); }

    void finish() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.used) {
                throw ConfigError(source_ + " line " + std::to_string(entry.line) +
                                  ": unknown key '" + key + "'");
            }
        }
    }

    [[noreturn]] void missing(const std::string& key) const {
        std::string msg = source_ + ": missing required key '" + key + "' (required keys: ";
        for (std::size_t i = 0; i < required_.size(); ++i) {
            if (i) msg += ", ";
            msg += required_[i];
        }
        msg += ")";
        throw ConfigError(msg);
    }

private:
    static std::string_view trim(std::string_view text) {
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
            text.remove_prefix(1);
        }
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
            text.remove_suffix(1);
        }
        return text;
    }

    static std::vector<std::string> split_list(const std::string& text) {
        std::vector<std::string> parts;
        for (const auto& part : split(text, ',')) {
            const auto trimmed = trim(part);
            if (!trimmed.empty()) parts.emplace_back(trimmed);
        }
        return parts;
    }

    std::uint64_t parse_u64(const std::string& key, const std::string& text) const {
        std::uint64_t value = 0;
        const auto* begin = text.data();
        const auto* end = begin + text.size();
        const auto result = std::from_chars(begin, end, value);
        if (result.ec != std::errc() || result.ptr != end) {
            throw ConfigError(source_ + ": key '" + key + "': bad unsigned integer '" + text +
                              "'");
        }
        return value;
    }

    std::string source_;
    std::map<std::string, KvEntry> entries_;
    std::vector<std::string> required_;
};

const std::vector<std::string> kSweepRequiredKeys = {
    "pop_size", "selection", "benchmark", "workers", "sync_intervals", "repetitions"};
const std::vector<std::string> kSimRequiredKeys = {
    "pop_size", "selection", "benchmark", "workers", "sync_interval"};

SimConfig base_config_from(KvFile& kv, const std::string& source) {
    SimConfig cfg;
    const std::uint64_t pop_size = kv.require_u64("pop_size");
    if (pop_size < 2 || pop_size % 2 != 0) {
        throw ConfigError(source + ": key 'pop_size': must be even and >= 2 (probability 0.5 "
                          "is unrepresentable for an odd population)");
    }
    cfg.cga.population_size = pop_size;
    const std::uint64_t selection = kv.require_u64("selection");
    if (selection < 2) {
        throw ConfigError(source + ": key 'selection': must be >= 2");
    }
    cfg.cga.selection_rate = static_cast<std::uint32_t>(selection);
    cfg.cga.seed = kv.take_u64("seed", 1);

    const std::string benchmark = kv.require_string("benchmark");
    const auto length = kv.take_u64("length", 0);
    const double trap_ratio = kv.take_double("trap_ratio", 0.7);
    try {
        cfg.benchmark = make_benchmark(benchmark, static_cast<std::uint32_t>(length), trap_ratio);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": key 'benchmark': " + e.what());
    }
    cfg.max_total_evaluations = kv.take_u64("eval_cap", 100'000'000);
    if (cfg.max_total_evaluations < 1) {
        throw ConfigError(source + ": key 'eval_cap': must be >= 1");
    }
    return cfg;
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in, const std::string& source_name) {
    KvFile kv(in, source_name);
    kv.set_required(kSweepRequiredKeys);

    SweepSpec spec;
    spec.base = base_config_from(kv, source_name);

    for (const auto p : kv.require_u64_list("workers")) {
        if (p < 1) throw ConfigError(source_name + ": key 'workers': values must be >= 1");
        spec.worker_counts.push_back(static_cast<std::uint32_t>(p));
    }
    for (const auto m : kv.require_u64_list("sync_intervals")) {
        if (m < 1) {
            throw ConfigError(source_name + ": key 'sync_intervals': values must be >= 1");
        }
        spec.sync_intervals.push_back(m);
    }
    spec.repetitions = static_cast<std::uint32_t>(kv.require_u64("repetitions"));
    if (spec.repetitions < 1) {
        throw ConfigError(source_name + ": key 'repetitions': must be >= 1");
    }
    // Empty path / zero parallelism mean "not set here"; the CLI layers its
    // own flags and environment on top.
    spec.output_path = kv.take("out").value_or("");
    spec.parallelism = static_cast<unsigned>(kv.take_u64("parallel", 0));

    kv.finish();
    spec.base.workers = spec.worker_counts.front();
    spec.base.sync_interval = spec.sync_intervals.front();
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_sweep_spec(in, path);
}

SimConfig parse_sim_config(std::istream& in, const std::string& source_name) {
    KvFile kv(in, source_name);
    kv.set_required(kSimRequiredKeys);

    SimConfig cfg = base_config_from(kv, source_name);
    cfg.workers = static_cast<std::uint32_t>(kv.require_u64("workers"));
    cfg.sync_interval = kv.require_u64("sync_interval");
    kv.finish();
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_sim_config(in, path);
}

}  // namespace pcga
