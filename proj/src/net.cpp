#include "pcga/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace pcga::net {

namespace {

// ---------------------------------------------------------------------------
// Small POSIX socket helpers (IPv4)
// ---------------------------------------------------------------------------

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

Endpoint parse_endpoint(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
        throw std::invalid_argument("address must be host:port, got '" + address + "'");
    }
    Endpoint ep;
    ep.host = address.substr(0, colon);
    const std::string port_text = address.substr(colon + 1);
    unsigned long port = 0;
    try {
        port = std::stoul(port_text);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad port in address '" + address + "'");
    }
    if (port > 65535) throw std::invalid_argument("port out of range in '" + address + "'");
    ep.port = static_cast<std::uint16_t>(port);
    return ep;
}

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    ~Socket() { close(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    /// Wakes up any thread blocked in read/accept on this socket.
    void interrupt() const {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

    bool read_exact(std::uint8_t* data, std::size_t size) const {
        std::size_t done = 0;
        while (done < size) {
            const ssize_t got = ::recv(fd_, data + done, size - done, 0);
            if (got > 0) {
                done += static_cast<std::size_t>(got);
                continue;
            }
            if (got < 0 && errno == EINTR) continue;
            return false;  // EOF or hard error
        }
        return true;
    }

    bool write_all(const std::uint8_t* data, std::size_t size) const {
        std::size_t done = 0;
        while (done < size) {
            const ssize_t sent = ::send(fd_, data + done, size - done, MSG_NOSIGNAL);
            if (sent > 0) {
                done += static_cast<std::size_t>(sent);
                continue;
            }
            if (sent < 0 && errno == EINTR) continue;
            return false;
        }
        return true;
    }

private:
    int fd_ = -1;
};

Socket tcp_listen(const Endpoint& ep) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw std::runtime_error("socket(): " + std::string(strerror(errno)));

    const int yes = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (ep.host.empty() || ep.host == "0.0.0.0" || ep.host == "*") {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
        throw std::invalid_argument("bind host must be an IPv4 address, got '" + ep.host + "'");
    }
    if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        throw std::runtime_error("bind(" + ep.host + ":" + std::to_string(ep.port) +
                                 "): " + std::string(strerror(errno)));
    }
    if (::listen(sock.fd(), 64) != 0) {
        throw std::runtime_error("listen(): " + std::string(strerror(errno)));
    }
    return sock;
}

std::uint16_t local_port(const Socket& sock) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw std::runtime_error("getsockname(): " + std::string(strerror(errno)));
    }
    return ntohs(addr.sin_port);
}

Socket tcp_connect(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* results = nullptr;
    const std::string port_text = std::to_string(ep.port);
    if (::getaddrinfo(ep.host.c_str(), port_text.c_str(), &hints, &results) != 0) {
        return Socket();
    }
    Socket sock;
    for (addrinfo* it = results; it != nullptr; it = it->ai_next) {
        Socket attempt(::socket(it->ai_family, it->ai_socktype, it->ai_protocol));
        if (!attempt.valid()) continue;
        if (::connect(attempt.fd(), it->ai_addr, it->ai_addrlen) == 0) {
            sock = std::move(attempt);
            break;
        }
    }
    ::freeaddrinfo(results);
    if (sock.valid()) {
        const int yes = 1;
        ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
    }
    return sock;
}

std::string peer_name(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "?";
    char text[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &addr.sin_addr, text, sizeof(text));
    return std::string(text) + ":" + std::to_string(ntohs(addr.sin_port));
}

/// Reads one frame; empty optional on clean EOF / connection loss.
/// Malformed data raises ProtocolError.
std::optional<Message> read_message(const Socket& sock) {
    std::uint8_t header[kFrameHeaderSize];
    if (!sock.read_exact(header, sizeof(header))) return std::nullopt;
    const FrameHeader parsed = parse_frame_header({header, sizeof(header)});
    std::vector<std::uint8_t> payload(parsed.payload_size);
    if (parsed.payload_size > 0 && !sock.read_exact(payload.data(), payload.size())) {
        throw ProtocolError(ProtocolErrorCode::truncated, "connection dropped mid-payload");
    }
    return parse_payload(parsed.type, payload);
}

bool write_message(const Socket& sock, const Message& message) {
    const auto bytes = frame(message);
    return sock.write_all(bytes.data(), bytes.size());
}

std::string format_fitness(double value) {
    std::ostringstream out;
    out << value;
    return out.str();
}

}  // namespace

std::string to_string(ManagerStatus status) {
    switch (status) {
        case ManagerStatus::running: return "running";
        case ManagerStatus::solved: return "solved";
        case ManagerStatus::converged: return "converged";
        case ManagerStatus::shutting_down: return "shutting-down";
    }
    return "unknown";
}

std::string to_string(WorkerExit exit) {
    switch (exit) {
        case WorkerExit::terminated_solved: return "solved";
        case WorkerExit::terminated_converged: return "converged";
        case WorkerExit::terminated_shutdown: return "shutdown";
        case WorkerExit::connection_lost: return "connection-lost";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Manager
// ---------------------------------------------------------------------------

struct ManagerService::Impl {
    explicit Impl(ManagerOptions opts) : options(std::move(opts)) {}

    ManagerOptions options;

    mutable std::mutex state_mu;
    std::condition_variable state_cv;
    ProbabilityVector vector;
    ManagerStatus status = ManagerStatus::running;
    std::uint64_t merges_applied = 0;
    std::uint64_t clamp_events = 0;
    std::uint64_t total_reported_evaluations = 0;
    double best_fitness_reported = -std::numeric_limits<double>::infinity();

    Socket listener;
    std::uint16_t bound_port = 0;
    int wake_pipe[2] = {-1, -1};  // jolts the accept loop out of poll()
    std::thread accept_thread;
    std::thread checkpoint_thread;
    std::atomic<bool> stopping{false};

    ~Impl() {
        if (wake_pipe[0] >= 0) ::close(wake_pipe[0]);
        if (wake_pipe[1] >= 0) ::close(wake_pipe[1]);
    }

    std::mutex conns_mu;
    std::vector<std::shared_ptr<Socket>> conns;
    std::vector<std::thread> conn_threads;

    void log(const std::string& line) const {
        if (options.log) options.log(line);
    }

    ManagerStatus status_now() const {
        std::lock_guard<std::mutex> lock(state_mu);
        return status;
    }

    // Must hold state_mu. Monotone: only a running manager can transition.
    void set_terminal_locked(ManagerStatus next) {
        if (status != ManagerStatus::running) return;
        status = next;
        state_cv.notify_all();
        log("evt=status status=" + to_string(next));
    }

    TerminateReason terminate_reason_locked() const {
        switch (status) {
            case ManagerStatus::solved: return TerminateReason::solved;
            case ManagerStatus::converged: return TerminateReason::converged;
            default: return TerminateReason::shutdown;
        }
    }

    void handle_connection(const std::shared_ptr<Socket>& sock) {
        const std::string peer = peer_name(sock->fd());
        log("evt=connect peer=" + peer);
        serve_connection(*sock, peer);
        // Close eagerly: the registry keeps the object alive until stop().
        sock->close();
    }

    void serve_connection(const Socket& sock, const std::string& peer) {
        try {
            for (;;) {
                const auto message = read_message(sock);
                if (!message) {
                    log("evt=disconnect peer=" + peer);
                    return;
                }
                if (const auto* hello = std::get_if<HelloMsg>(&*message)) {
                    Message reply;
                    {
                        std::lock_guard<std::mutex> lock(state_mu);
                        if (status != ManagerStatus::running) {
                            reply = TerminateMsg{terminate_reason_locked()};
                        } else {
                            reply = SnapshotMsg{vector};
                        }
                    }
                    std::string token = hello->resume_token
                                            ? std::to_string(*hello->resume_token)
                                            : std::string("-");
                    log("evt=hello peer=" + peer + " token=" + token);
                    if (!write_message(sock, reply)) return;
                    if (std::holds_alternative<TerminateMsg>(reply)) {
                        log("evt=terminate peer=" + peer + " reason=" +
                            to_string(std::get<TerminateMsg>(reply).reason));
                    } else {
                        log("evt=snapshot peer=" + peer);
                    }
                } else if (const auto* delta = std::get_if<DeltaMsg>(&*message)) {
                    Message reply;
                    std::size_t clamped = 0;
                    {
                        std::lock_guard<std::mutex> lock(state_mu);
                        if (status != ManagerStatus::running) {
                            reply = TerminateMsg{terminate_reason_locked()};
                        } else {
                            clamped = merge_delta(vector, delta->report);
                            clamp_events += clamped;
                            ++merges_applied;
                            total_reported_evaluations += delta->report.evaluations;
                            best_fitness_reported =
                                std::max(best_fitness_reported, delta->best_fitness);

                            if (options.policy.target_fitness &&
                                best_fitness_reported >= *options.policy.target_fitness) {
                                set_terminal_locked(ManagerStatus::solved);
                            } else if (vector.converged()) {
                                set_terminal_locked(ManagerStatus::converged);
                            } else if (options.policy.max_total_evaluations &&
                                       total_reported_evaluations >=
                                           *options.policy.max_total_evaluations) {
                                set_terminal_locked(ManagerStatus::shutting_down);
                            }

                            if (status != ManagerStatus::running) {
                                reply = TerminateMsg{terminate_reason_locked()};
                            } else {
                                // Encoded under the lock: the UPDATE always
                                // carries the fully merged vector.
                                reply = UpdateMsg{encode_counts(vector)};
                            }
                        }
                    }
                    log("evt=merge peer=" + peer +
                        " entries=" + std::to_string(delta->report.entries.size()) +
                        " evals=" + std::to_string(delta->report.evaluations) +
                        " best=" + format_fitness(delta->best_fitness));
                    if (clamped > 0) {
                        log("evt=clamp peer=" + peer + " genes=" + std::to_string(clamped));
                    }
                    if (!write_message(sock, reply)) return;
                    if (const auto* term = std::get_if<TerminateMsg>(&reply)) {
                        log("evt=terminate peer=" + peer + " reason=" + to_string(term->reason));
                    }
                } else {
                    log("evt=error peer=" + peer + " what=unexpected-message-type");
                    return;
                }
            }
        } catch (const ProtocolError& e) {
            log("evt=error peer=" + peer + " what=" + e.what());
        } catch (const std::invalid_argument& e) {
            // e.g. a delta aimed past the vector end; drop the connection,
            // keep serving everyone else.
            log("evt=error peer=" + peer + " what=" + e.what());
        }
    }

    void accept_loop() {
        for (;;) {
            pollfd fds[2] = {{listener.fd(), POLLIN, 0}, {wake_pipe[0], POLLIN, 0}};
            const int ready = ::poll(fds, 2, -1);
            if (ready < 0) {
                if (errno == EINTR) continue;
                return;
            }
            if ((fds[1].revents & POLLIN) != 0 || stopping.load()) return;
            if ((fds[0].revents & POLLIN) == 0) continue;
            const int fd = ::accept(listener.fd(), nullptr, nullptr);
            if (fd < 0) {
                if (errno == EINTR || errno == ECONNABORTED) continue;
                return;  // listener closed
            }
            if (stopping.load()) {
                ::close(fd);
                return;
            }
            const int yes = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
            auto sock = std::make_shared<Socket>(fd);
            std::lock_guard<std::mutex> lock(conns_mu);
            conns.push_back(sock);
            conn_threads.emplace_back([this, sock]() { handle_connection(sock); });
        }
    }

    void checkpoint_loop() {
        std::unique_lock<std::mutex> lock(state_mu);
        const auto interval = std::chrono::duration<double>(
            std::max(options.checkpoint_every_seconds, 0.05));
        while (!stopping.load()) {
            state_cv.wait_for(lock, interval);
            if (stopping.load()) break;
            const ProbabilityVector copy = vector;
            lock.unlock();
            try {
                save_vector_checkpoint(*options.checkpoint_path, copy);
                log("evt=checkpoint path=" + *options.checkpoint_path);
            } catch (const std::exception& e) {
                log("evt=error what=checkpoint-failed detail=" + std::string(e.what()));
            }
            lock.lock();
        }
    }
};

ManagerService::ManagerService(ManagerOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

ManagerService::~ManagerService() { stop(); }

void ManagerService::start() {
    auto& impl = *impl_;
    impl.options.cga.validate();
    if (impl.options.length == 0 && !impl.options.initial_vector) {
        throw std::invalid_argument("manager needs a chromosome length");
    }

    if (impl.options.initial_vector) {
        const auto& v = *impl.options.initial_vector;
        if (v.population_size() != impl.options.cga.population_size ||
            (impl.options.length != 0 && v.length() != impl.options.length)) {
            throw std::invalid_argument("initial vector does not match manager parameters");
        }
        impl.vector = v;
        impl.log("evt=resume length=" + std::to_string(v.length()));
    } else {
        // Step 1: fresh vector with every gene at 0.5, then wait for workers.
        impl.vector = init_vector(impl.options.cga, impl.options.length);
    }

    impl.listener = tcp_listen(parse_endpoint(impl.options.bind_address));
    impl.bound_port = local_port(impl.listener);
    if (::pipe(impl.wake_pipe) != 0) {
        throw std::runtime_error("pipe(): " + std::string(strerror(errno)));
    }
    impl.log("evt=listen addr=" + impl.options.bind_address +
             " port=" + std::to_string(impl.bound_port));
    impl.accept_thread = std::thread([this]() { impl_->accept_loop(); });
    if (impl.options.checkpoint_path) {
        impl.checkpoint_thread = std::thread([this]() { impl_->checkpoint_loop(); });
    }
}

std::uint16_t ManagerService::port() const { return impl_->bound_port; }

bool ManagerService::wait_terminal(std::optional<double> timeout_seconds) {
    auto& impl = *impl_;
    std::unique_lock<std::mutex> lock(impl.state_mu);
    const auto terminal = [&]() { return impl.status != ManagerStatus::running; };
    if (timeout_seconds) {
        return impl.state_cv.wait_for(lock, std::chrono::duration<double>(*timeout_seconds),
                                      terminal);
    }
    impl.state_cv.wait(lock, terminal);
    return true;
}

void ManagerService::request_shutdown() {
    std::lock_guard<std::mutex> lock(impl_->state_mu);
    impl_->set_terminal_locked(ManagerStatus::shutting_down);
}

void ManagerService::stop() {
    auto& impl = *impl_;
    if (impl.stopping.exchange(true)) {
        return;
    }
    request_shutdown();
    if (impl.wake_pipe[1] >= 0) {
        const char byte = 1;
        [[maybe_unused]] const auto written = ::write(impl.wake_pipe[1], &byte, 1);
    }
    {
        std::lock_guard<std::mutex> lock(impl.conns_mu);
        for (const auto& sock : impl.conns) sock->interrupt();
    }
    impl.state_cv.notify_all();
    if (impl.accept_thread.joinable()) impl.accept_thread.join();
    if (impl.checkpoint_thread.joinable()) impl.checkpoint_thread.join();
    impl.listener.close();
    std::vector<std::thread> threads;
    {
        std::lock_guard<std::mutex> lock(impl.conns_mu);
        threads.swap(impl.conn_threads);
    }
    for (auto& t : threads) {
        if (t.joinable()) t.join();
    }
    if (impl.options.checkpoint_path) {
        try {
            save_vector_checkpoint(*impl.options.checkpoint_path, stats().vector);
        } catch (const std::exception&) {
        }
    }
}

ManagerStats ManagerService::stats() const {
    const auto& impl = *impl_;
    std::lock_guard<std::mutex> lock(impl.state_mu);
    ManagerStats out;
    out.vector = impl.vector;
    out.merges_applied = impl.merges_applied;
    out.clamp_events = impl.clamp_events;
    out.total_reported_evaluations = impl.total_reported_evaluations;
    out.best_fitness_reported = impl.best_fitness_reported;
    out.status = impl.status;
    return out;
}

void ManagerService::serve(double linger_seconds) {
    start();
    wait_terminal();
    // Keep answering TERMINATE so in-flight workers exit cleanly.
    std::this_thread::sleep_for(std::chrono::duration<double>(std::max(linger_seconds, 0.0)));
    stop();
}

// ---------------------------------------------------------------------------
// Worker
// ---------------------------------------------------------------------------

namespace {

struct WorkerSession {
    ProbabilityVector snapshot;
    ProbabilityVector local;
    CgaParams params;
    FitnessFunction benchmark;
    std::uint64_t evals_since_sync = 0;
};

}  // namespace

WorkerReport worker_run(const WorkerOptions& options) {
    if (!options.benchmark) {
        throw std::invalid_argument("worker needs a benchmark factory");
    }
    if (options.sync_interval < 1) {
        throw std::invalid_argument("sync interval must be >= 1");
    }
    const Endpoint endpoint = parse_endpoint(options.manager_address);
    const auto log = [&](const std::string& line) {
        if (options.log) options.log(line);
    };

    WorkerReport report;
    report.best_fitness = -std::numeric_limits<double>::infinity();
    // Mirrors the simulator's stream derivation for worker index 0, so one
    // live worker with seed σ matches sim P=1 with master seed σ.
    SplitRng rng = SplitRng(options.seed).derive(0);
    CgaScratch scratch;

    std::uint32_t failures = 0;
    double backoff = options.backoff_initial_seconds;
    while (failures <= options.max_connect_attempts) {
        Socket sock = tcp_connect(endpoint);
        if (!sock.valid()) {
            ++failures;
            log("evt=retry attempt=" + std::to_string(failures));
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff = std::min(backoff * 2.0, options.backoff_max_seconds);
            continue;
        }
        log("evt=connect manager=" + options.manager_address);

        try {
            HelloMsg hello;
            hello.resume_token = options.seed;
            if (!write_message(sock, hello)) throw std::runtime_error("connection lost");
            auto message = read_message(sock);
            if (!message) throw std::runtime_error("connection lost");
            if (const auto* term = std::get_if<TerminateMsg>(&*message)) {
                log("evt=terminate reason=" + to_string(term->reason));
                report.exit = term->reason == TerminateReason::solved
                                  ? WorkerExit::terminated_solved
                              : term->reason == TerminateReason::converged
                                  ? WorkerExit::terminated_converged
                                  : WorkerExit::terminated_shutdown;
                return report;
            }
            const auto* snapshot = std::get_if<SnapshotMsg>(&*message);
            if (!snapshot) {
                throw ProtocolError(ProtocolErrorCode::bad_type,
                                    "expected SNAPSHOT or TERMINATE after HELLO");
            }

            WorkerSession session{snapshot->vector, snapshot->vector, CgaParams{}, {}, 0};
            session.params.population_size = snapshot->vector.population_size();
            session.params.selection_rate = options.selection_rate;
            session.params.seed = options.seed;
            session.benchmark = options.benchmark(snapshot->vector.length());
            if (session.benchmark.length != snapshot->vector.length()) {
                throw std::invalid_argument("benchmark length does not match the snapshot");
            }
            log("evt=snapshot n=" + std::to_string(snapshot->vector.population_size()) +
                " l=" + std::to_string(snapshot->vector.length()));
            failures = 0;
            backoff = options.backoff_initial_seconds;

            for (;;) {
                // Step 4: explore m new individuals with the local compact GA.
                while (session.evals_since_sync < options.sync_interval) {
                    const TurnOutcome turn = run_turn(session.local, session.params,
                                                      session.benchmark, rng, scratch);
                    session.evals_since_sync += turn.evaluations;
                    report.evaluations += turn.evaluations;
                    report.best_fitness = std::max(report.best_fitness, turn.best_fitness);
                }

                // Step 5: report the differences (plus our best fitness).
                DeltaMsg delta;
                delta.report = compute_delta(session.snapshot, session.local,
                                             session.evals_since_sync);
                delta.best_fitness = report.best_fitness;
                if (!write_message(sock, delta)) throw std::runtime_error("connection lost");

                auto reply = read_message(sock);
                if (!reply) throw std::runtime_error("connection lost");
                if (const auto* term = std::get_if<TerminateMsg>(&*reply)) {
                    log("evt=terminate reason=" + to_string(term->reason));
                    report.exit = term->reason == TerminateReason::solved
                                      ? WorkerExit::terminated_solved
                                  : term->reason == TerminateReason::converged
                                      ? WorkerExit::terminated_converged
                                      : WorkerExit::terminated_shutdown;
                    report.final_local = session.local;
                    return report;
                }
                const auto* update = std::get_if<UpdateMsg>(&*reply);
                if (!update) {
                    throw ProtocolError(ProtocolErrorCode::bad_type,
                                        "expected UPDATE or TERMINATE after DELTA");
                }
                // Step 7: adopt the refreshed full vector as snapshot+local.
                session.snapshot = decode_counts(update->packed_counts,
                                                 session.params.population_size,
                                                 session.benchmark.length);
                session.local = session.snapshot;
                session.evals_since_sync = 0;
                ++report.transactions;
                log("evt=sync transactions=" + std::to_string(report.transactions) +
                    " evals=" + std::to_string(report.evaluations));
            }
        } catch (const ProtocolError& e) {
            log("evt=error what=" + std::string(e.what()));
        } catch (const std::invalid_argument& e) {
            log("evt=error what=" + std::string(e.what()));
            report.exit = WorkerExit::connection_lost;
            return report;  // configuration mismatch; retrying won't help
        } catch (const std::runtime_error& e) {
            log("evt=error what=" + std::string(e.what()));
        }

        // Connection failed mid-session: discard unsent progress, back off,
        // re-enter with a fresh HELLO.
        ++failures;
        if (failures > options.max_connect_attempts) break;
        log("evt=retry attempt=" + std::to_string(failures));
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        backoff = std::min(backoff * 2.0, options.backoff_max_seconds);
    }
    report.exit = WorkerExit::connection_lost;
    return report;
}

// ---------------------------------------------------------------------------
// Checkpoint files
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint8_t kCheckpointMagic[4] = {'P', 'C', 'G', 'C'};
constexpr std::uint8_t kCheckpointVersion = 1;
}  // namespace

void save_vector_checkpoint(const std::string& path, const ProbabilityVector& v) {
    std::vector<std::uint8_t> blob;
    blob.insert(blob.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
    blob.push_back(kCheckpointVersion);
    for (int shift = 56; shift >= 0; shift -= 8) {
        blob.push_back(static_cast<std::uint8_t>(v.population_size() >> shift));
    }
    for (int shift = 24; shift >= 0; shift -= 8) {
        blob.push_back(static_cast<std::uint8_t>(v.length() >> shift));
    }
    const auto packed = encode_counts(v);
    blob.insert(blob.end(), packed.begin(), packed.end());

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
        if (!out) throw std::runtime_error("failed writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot move checkpoint into place at '" + path + "'");
    }
}

ProbabilityVector load_vector_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (blob.size() < 17 || std::memcmp(blob.data(), kCheckpointMagic, 4) != 0) {
        throw std::runtime_error("'" + path + "' is not a vector checkpoint");
    }
    if (blob[4] != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version in '" + path + "'");
    }
    std::uint64_t population_size = 0;
    for (int i = 0; i < 8; ++i) population_size = (population_size << 8) | blob[5 + i];
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length = (length << 8) | blob[13 + i];
    const std::span<const std::uint8_t> packed(blob.data() + 17, blob.size() - 17);
    return decode_counts(packed, population_size, length);
}

}  // namespace pcga::net
