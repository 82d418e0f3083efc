#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pcga/cga.hpp"
#include "pcga/protocol.hpp"

namespace pcga::net {

/// One structured event per line (evt=... key=value ...), for humans and for
/// test scraping alike.
using LogSink = std::function<void(const std::string&)>;

struct TerminationPolicy {
    // Manager declares "solved" when a worker's piggybacked best fitness
    // reaches this value.
    std::optional<double> target_fitness;
    // Manager shuts down once workers have reported this many evaluations.
    std::optional<std::uint64_t> max_total_evaluations;
};

enum class ManagerStatus : std::uint8_t { running, solved, converged, shutting_down };

std::string to_string(ManagerStatus status);

struct ManagerOptions {
    std::string bind_address = "127.0.0.1:0";  // host:port, port 0 = ephemeral
    CgaParams cga;
    std::uint32_t length = 0;
    TerminationPolicy policy;
    std::optional<ProbabilityVector> initial_vector;  // e.g. a restored checkpoint
    std::optional<std::string> checkpoint_path;
    double checkpoint_every_seconds = 30.0;
    LogSink log;
};

struct ManagerStats {
    ProbabilityVector vector;
    std::uint64_t merges_applied = 0;
    std::uint64_t clamp_events = 0;
    std::uint64_t total_reported_evaluations = 0;
    double best_fitness_reported = 0.0;
    ManagerStatus status = ManagerStatus::running;
};

/// Holds the authoritative probability vector and serves any number of
/// workers over the wire protocol. Each connection handles HELLO→SNAPSHOT
/// followed by repeated DELTA→UPDATE transactions; merges are applied one at
/// a time under the state lock, and the UPDATE payload is encoded under the
/// same lock so it always reflects a fully applied merge. On terminal status
/// every subsequent DELTA or HELLO is answered with TERMINATE. Malformed
/// frames close only their own connection; worker disconnects are logged and
/// otherwise ignored.
class ManagerService {
public:
    explicit ManagerService(ManagerOptions options);
    ~ManagerService();

    ManagerService(const ManagerService&) = delete;
    ManagerService& operator=(const ManagerService&) = delete;

    void start();
    std::uint16_t port() const;

    /// Blocks until status leaves `running` (or the timeout passes).
    /// Returns true when terminal.
    bool wait_terminal(std::optional<double> timeout_seconds = std::nullopt);

    /// Monotone transition to shutting-down (no-op once terminal).
    void request_shutdown();

    /// Unblocks all connections and joins every thread.
    void stop();

    ManagerStats stats() const;

    /// Convenience for the CLI: start, wait until terminal, keep answering
    /// TERMINATE for `linger_seconds`, then stop.
    void serve(double linger_seconds = 3.0);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class WorkerExit : std::uint8_t {
    terminated_solved,
    terminated_converged,
    terminated_shutdown,
    connection_lost,
};

std::string to_string(WorkerExit exit);

struct WorkerOptions {
    std::string manager_address;       // host:port
    std::uint64_t sync_interval = 8;   // m
    std::uint32_t selection_rate = 8;  // s
    std::uint64_t seed = 1;
    /// Built once the snapshot reveals the chromosome length.
    std::function<FitnessFunction(std::uint32_t length)> benchmark;
    std::uint32_t max_connect_attempts = 10;
    double backoff_initial_seconds = 0.1;
    double backoff_max_seconds = 3.0;
    LogSink log;
};

struct WorkerReport {
    WorkerExit exit = WorkerExit::connection_lost;
    std::uint64_t evaluations = 0;
    std::uint64_t transactions = 0;
    double best_fitness = 0.0;
    std::optional<ProbabilityVector> final_local;
};

/// Runs one worker until the manager terminates it or the retry budget runs
/// out. The worker performs tournament rounds until >= m evaluations since
/// its last sync, sends a DELTA (with its best-ever fitness), and blocks for
/// the manager's reply. On reconnect it starts over from a fresh HELLO and
/// snapshot; unsent local progress is discarded.
WorkerReport worker_run(const WorkerOptions& options);

/// Vector checkpoint file: "PCGC", format version, N, ℓ, packed counts.
/// An optional persistence extension; the exchange protocol itself never
/// persists anything.
void save_vector_checkpoint(const std::string& path, const ProbabilityVector& v);
ProbabilityVector load_vector_checkpoint(const std::string& path);

}  // namespace pcga::net
