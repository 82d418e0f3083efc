#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pcga/probability_vector.hpp"

namespace pcga {

// ---------------------------------------------------------------------------
// Model exchange as pure data transformations
// ---------------------------------------------------------------------------

struct DeltaEntry {
    std::uint32_t gene = 0;
    std::int64_t delta = 0;  // never 0 in a valid report
    bool operator==(const DeltaEntry&) const = default;
};

/// Sparse count differences between a worker's local vector and the snapshot
/// it started from. Entries are strictly ascending by gene, deltas nonzero.
struct DeltaReport {
    std::vector<DeltaEntry> entries;
    std::uint64_t evaluations = 0;
    bool operator==(const DeltaReport&) const = default;
};

/// entries = { (i, local[i] − snapshot[i]) : local[i] ≠ snapshot[i] }.
DeltaReport compute_delta(const ProbabilityVector& snapshot, const ProbabilityVector& local,
                          std::uint64_t evaluations);

/// Adds each entry's delta to the target count, clamping to [0, N] (clamping
/// only matters when concurrent reports overlap). Validates the whole report
/// before touching any state. Returns the number of clamp events.
std::size_t merge_delta(ProbabilityVector& target, const DeltaReport& report);

// ---------------------------------------------------------------------------
// Bit-packed count codec
// ---------------------------------------------------------------------------

/// Bits per count field: the N+1 possible frequency counts fit in
/// ceil(log2(N+1)) bits.
std::uint32_t count_bit_width(std::uint64_t population_size);

/// Encoded payload size: ceil(length * width / 8) bytes.
std::size_t packed_counts_size(std::uint64_t population_size, std::uint32_t length);

/// Fixed-width big-endian bit packing, gene 0 first, MSB of each field
/// first, final byte zero-padded on the low-order side.
std::vector<std::uint8_t> encode_counts(const ProbabilityVector& v);

/// Exact inverse of encode_counts. Rejects a payload of the wrong size and
/// any decoded count exceeding N (corruption signal).
ProbabilityVector decode_counts(std::span<const std::uint8_t> payload,
                                std::uint64_t population_size, std::uint32_t length);

// ---------------------------------------------------------------------------
// Wire protocol
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint8_t kFrameMagic[4] = {'P', 'C', 'G', 'A'};
inline constexpr std::size_t kFrameHeaderSize = 10;  // magic + version + type + length
inline constexpr std::uint32_t kMaxFramePayload = 64u * 1024u * 1024u;

enum class MessageType : std::uint8_t {
    hello = 1,
    snapshot = 2,
    delta = 3,
    update = 4,
    terminate = 5,
};

enum class TerminateReason : std::uint8_t {
    solved = 1,
    converged = 2,
    shutdown = 3,
};

std::string to_string(TerminateReason reason);

struct HelloMsg {
    std::uint8_t protocol_version = kProtocolVersion;
    std::optional<std::uint64_t> resume_token;
    bool operator==(const HelloMsg&) const = default;
};

struct SnapshotMsg {
    ProbabilityVector vector;
    bool operator==(const SnapshotMsg&) const = default;
};

struct DeltaMsg {
    DeltaReport report;
    // Best fitness the worker has seen so far; rides along with every report
    // so the manager can detect that the problem is solved.
    double best_fitness = -std::numeric_limits<double>::infinity();
    bool operator==(const DeltaMsg&) const = default;
};

struct UpdateMsg {
    // The refreshed full vector in packed form. The worker decodes it with
    // the N and ℓ it learned from its snapshot.
    std::vector<std::uint8_t> packed_counts;
    bool operator==(const UpdateMsg&) const = default;
};

struct TerminateMsg {
    TerminateReason reason = TerminateReason::shutdown;
    bool operator==(const TerminateMsg&) const = default;
};

using Message = std::variant<HelloMsg, SnapshotMsg, DeltaMsg, UpdateMsg, TerminateMsg>;

enum class ProtocolErrorCode {
    bad_magic,
    bad_version,
    bad_type,
    truncated,
    trailing_data,
    length_mismatch,
    count_out_of_range,
    delta_out_of_range,
    bad_report,
    bad_payload,
};

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(ProtocolErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ProtocolErrorCode code() const { return code_; }

private:
    ProtocolErrorCode code_;
};

/// Envelope: 4-byte magic "PCGA", 1-byte version, 1-byte message type,
/// 4-byte big-endian payload length, payload.
std::vector<std::uint8_t> frame(const Message& message);

/// Parses one complete frame. Rejects bad magic/version/type, truncated or
/// oversized payloads, and trailing bytes — each with a distinct diagnostic.
Message unframe(std::span<const std::uint8_t> bytes);

/// Streaming helpers: validate the 10-byte header first, then parse the
/// payload once it has been read in full.
struct FrameHeader {
    MessageType type;
    std::uint32_t payload_size;
};
FrameHeader parse_frame_header(std::span<const std::uint8_t> header);
Message parse_payload(MessageType type, std::span<const std::uint8_t> payload);

}  // namespace pcga
