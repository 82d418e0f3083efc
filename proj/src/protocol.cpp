#include "pcga/protocol.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace pcga {

// ---------------------------------------------------------------------------
// Delta computation and merging
// ---------------------------------------------------------------------------

DeltaReport compute_delta(const ProbabilityVector& snapshot, const ProbabilityVector& local,
                          std::uint64_t evaluations) {
    if (snapshot.length() != local.length()) {
        throw std::invalid_argument("delta between vectors of different length");
    }
    if (snapshot.population_size() != local.population_size()) {
        throw std::invalid_argument("delta between vectors of different population size");
    }
    DeltaReport report;
    report.evaluations = evaluations;
    for (std::uint32_t i = 0; i < snapshot.length(); ++i) {
        const auto before = snapshot.count(i);
        const auto after = local.count(i);
        if (before != after) {
            report.entries.push_back(
                {i, static_cast<std::int64_t>(after) - static_cast<std::int64_t>(before)});
        }
    }
    return report;
}

std::size_t merge_delta(ProbabilityVector& target, const DeltaReport& report) {
    std::uint64_t previous_gene = 0;
    bool first = true;
    for (const auto& entry : report.entries) {
        if (entry.gene >= target.length()) {
            throw std::invalid_argument("delta entry gene " + std::to_string(entry.gene) +
                                        " out of range (length " +
                                        std::to_string(target.length()) + ")");
        }
        if (!first && entry.gene <= previous_gene) {
            throw std::invalid_argument("delta entries must be strictly ascending by gene");
        }
        if (entry.delta == 0) {
            throw std::invalid_argument("delta entries must be nonzero");
        }
        previous_gene = entry.gene;
        first = false;
    }
    std::size_t clamp_events = 0;
    for (const auto& entry : report.entries) {
        if (target.add_clamped(entry.gene, entry.delta)) ++clamp_events;
    }
    return clamp_events;
}

// ---------------------------------------------------------------------------
// Bit-packed count codec
// ---------------------------------------------------------------------------

std::uint32_t count_bit_width(std::uint64_t population_size) {
    if (population_size < 1) {
        throw std::invalid_argument("population size must be >= 1");
    }
    // ceil(log2(N+1)) == number of bits needed to write N itself.
    return static_cast<std::uint32_t>(std::bit_width(population_size));
}

std::size_t packed_counts_size(std::uint64_t population_size, std::uint32_t length) {
    const std::uint64_t bits =
        static_cast<std::uint64_t>(count_bit_width(population_size)) * length;
    return static_cast<std::size_t>((bits + 7) / 8);
}

namespace {

class BitWriter {
public:
    explicit BitWriter(std::size_t reserve_bytes) { out_.reserve(reserve_bytes); }

    void put(std::uint64_t value, std::uint32_t width) {
        while (width > 0) {
            const std::uint32_t take = std::min(width, 8u - used_);
            const auto chunk = static_cast<std::uint8_t>(
                (value >> (width - take)) & ((1u << take) - 1u));
            current_ = static_cast<std::uint8_t>(current_ | (chunk << (8u - used_ - take)));
            used_ += take;
            width -= take;
            if (used_ == 8) {
                out_.push_back(current_);
                current_ = 0;
                used_ = 0;
            }
        }
    }

    std::vector<std::uint8_t> finish() {
        if (used_ > 0) {
            out_.push_back(current_);  // low-order bits stay zero
            current_ = 0;
            used_ = 0;
        }
        return std::move(out_);
    }

private:
    std::vector<std::uint8_t> out_;
    std::uint8_t current_ = 0;
    std::uint32_t used_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t take(std::uint32_t width) {
        std::uint64_t value = 0;
        while (width > 0) {
            const std::uint32_t available = 8u - used_;
            const std::uint32_t grab = std::min(width, available);
            const std::uint8_t byte = bytes_[index_];
            const auto chunk = static_cast<std::uint8_t>(
                (byte >> (available - grab)) & ((1u << grab) - 1u));
            value = (value << grab) | chunk;
            used_ += grab;
            width -= grab;
            if (used_ == 8) {
                used_ = 0;
                ++index_;
            }
        }
        return value;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t index_ = 0;
    std::uint32_t used_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_counts(const ProbabilityVector& v) {
    const std::uint32_t width = count_bit_width(v.population_size());
    BitWriter writer(packed_counts_size(v.population_size(), v.length()));
    for (const auto count : v.counts()) {
        writer.put(count, width);
    }
    return writer.finish();
}

ProbabilityVector decode_counts(std::span<const std::uint8_t> payload,
                                std::uint64_t population_size, std::uint32_t length) {
    if (population_size < 1 || population_size > ProbabilityVector::kMaxPopulationSize) {
        throw ProtocolError(ProtocolErrorCode::bad_payload,
                            "unsupported population size in packed counts");
    }
    if (length == 0) {
        throw ProtocolError(ProtocolErrorCode::bad_payload, "packed counts with zero length");
    }
    const std::size_t expected = packed_counts_size(population_size, length);
    if (payload.size() != expected) {
        throw ProtocolError(ProtocolErrorCode::length_mismatch,
                            "packed counts payload is " + std::to_string(payload.size()) +
                                " bytes, expected " + std::to_string(expected));
    }
    const std::uint32_t width = count_bit_width(population_size);
    BitReader reader(payload);
    std::vector<std::uint64_t> counts(length);
    for (std::uint32_t i = 0; i < length; ++i) {
        const std::uint64_t c = reader.take(width);
        if (c > population_size) {
            throw ProtocolError(ProtocolErrorCode::count_out_of_range,
                                "decoded count " + std::to_string(c) + " at gene " +
                                    std::to_string(i) + " exceeds population size " +
                                    std::to_string(population_size));
        }
        counts[i] = c;
    }
    return ProbabilityVector(population_size, std::move(counts));
}

// ---------------------------------------------------------------------------
// Wire protocol
// ---------------------------------------------------------------------------

std::string to_string(TerminateReason reason) {
    switch (reason) {
        case TerminateReason::solved: return "solved";
        case TerminateReason::converged: return "converged";
        case TerminateReason::shutdown: return "shutdown";
    }
    return "unknown";
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
    out.push_back(static_cast<std::uint8_t>(value >> 24));
    out.push_back(static_cast<std::uint8_t>(value >> 16));
    out.push_back(static_cast<std::uint8_t>(value >> 8));
    out.push_back(static_cast<std::uint8_t>(value));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(value >> shift));
    }
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value = (value << 8) | p[i];
    return value;
}

void put_f64(std::vector<std::uint8_t>& out, double value) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(value));
    std::memcpy(&bits, &value, sizeof(bits));
    put_u64(out, bits);
}

double get_f64(const std::uint8_t* p) {
    const std::uint64_t bits = get_u64(p);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

struct PayloadReader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (data.size() - pos < n) {
            throw ProtocolError(ProtocolErrorCode::truncated,
                                std::string("payload truncated while reading ") + what);
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return data[pos++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        const auto v = get_u32(data.data() + pos);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        const auto v = get_u64(data.data() + pos);
        pos += 8;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        const auto v = get_f64(data.data() + pos);
        pos += 8;
        return v;
    }
    std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
        need(n, what);
        auto view = data.subspan(pos, n);
        pos += n;
        return view;
    }
    std::span<const std::uint8_t> rest() {
        auto view = data.subspan(pos);
        pos = data.size();
        return view;
    }
    void finish(const char* what) const {
        if (pos != data.size()) {
            throw ProtocolError(ProtocolErrorCode::trailing_data,
                                std::string("unexpected trailing bytes in ") + what);
        }
    }
};

std::vector<std::uint8_t> encode_payload(const Message& message) {
    std::vector<std::uint8_t> out;
    if (const auto* hello = std::get_if<HelloMsg>(&message)) {
        out.push_back(hello->protocol_version);
        out.push_back(hello->resume_token ? 1 : 0);
        if (hello->resume_token) put_u64(out, *hello->resume_token);
    } else if (const auto* snapshot = std::get_if<SnapshotMsg>(&message)) {
        put_u64(out, snapshot->vector.population_size());
        put_u32(out, snapshot->vector.length());
        const auto packed = encode_counts(snapshot->vector);
        out.insert(out.end(), packed.begin(), packed.end());
    } else if (const auto* delta = std::get_if<DeltaMsg>(&message)) {
        put_u64(out, delta->report.evaluations);
        if (delta->report.entries.size() > std::numeric_limits<std::uint32_t>::max()) {
            throw ProtocolError(ProtocolErrorCode::bad_report, "too many delta entries");
        }
        put_u32(out, static_cast<std::uint32_t>(delta->report.entries.size()));
        for (const auto& entry : delta->report.entries) {
            if (entry.delta > std::numeric_limits<std::int32_t>::max() ||
                entry.delta < std::numeric_limits<std::int32_t>::min()) {
                throw ProtocolError(ProtocolErrorCode::delta_out_of_range,
                                    "delta at gene " + std::to_string(entry.gene) +
                                        " does not fit the 32-bit wire field");
            }
            put_u32(out, entry.gene);
            put_u32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(entry.delta)));
        }
        put_f64(out, delta->best_fitness);
    } else if (const auto* update = std::get_if<UpdateMsg>(&message)) {
        out = update->packed_counts;
    } else if (const auto* terminate = std::get_if<TerminateMsg>(&message)) {
        out.push_back(static_cast<std::uint8_t>(terminate->reason));
    }
    return out;
}

MessageType message_type(const Message& message) {
    switch (message.index()) {
        case 0: return MessageType::hello;
        case 1: return MessageType::snapshot;
        case 2: return MessageType::delta;
        case 3: return MessageType::update;
        default: return MessageType::terminate;
    }
}

}  // namespace

std::vector<std::uint8_t> frame(const Message& message) {
    const auto payload = encode_payload(message);
    if (payload.size() > kMaxFramePayload) {
        throw ProtocolError(ProtocolErrorCode::bad_payload, "payload exceeds frame limit");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + payload.size());
    out.insert(out.end(), std::begin(kFrameMagic), std::end(kFrameMagic));
    out.push_back(kProtocolVersion);
    out.push_back(static_cast<std::uint8_t>(message_type(message)));
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

FrameHeader parse_frame_header(std::span<const std::uint8_t> header) {
    if (header.size() < kFrameHeaderSize) {
        throw ProtocolError(ProtocolErrorCode::truncated, "frame header is incomplete");
    }
    if (std::memcmp(header.data(), kFrameMagic, sizeof(kFrameMagic)) != 0) {
        throw ProtocolError(ProtocolErrorCode::bad_magic, "frame does not start with PCGA magic");
    }
    if (header[4] != kProtocolVersion) {
        throw ProtocolError(ProtocolErrorCode::bad_version,
                            "unsupported protocol version " + std::to_string(header[4]));
    }
    const std::uint8_t type = header[5];
    if (type < static_cast<std::uint8_t>(MessageType::hello) ||
        type > static_cast<std::uint8_t>(MessageType::terminate)) {
        throw ProtocolError(ProtocolErrorCode::bad_type,
                            "unknown message type " + std::to_string(type));
    }
    const std::uint32_t payload_size = get_u32(header.data() + 6);
    if (payload_size > kMaxFramePayload) {
        throw ProtocolError(ProtocolErrorCode::bad_payload, "declared payload exceeds frame limit");
    }
    return {static_cast<MessageType>(type), payload_size};
}

Message parse_payload(MessageType type, std::span<const std::uint8_t> payload) {
    PayloadReader reader{payload};
    switch (type) {
        case MessageType::hello: {
            HelloMsg msg;
            msg.protocol_version = reader.u8("hello version");
            const std::uint8_t has_token = reader.u8("hello token flag");
            if (has_token > 1) {
                throw ProtocolError(ProtocolErrorCode::bad_payload, "bad hello token flag");
            }
            if (has_token) msg.resume_token = reader.u64("hello resume token");
            reader.finish("hello");
            if (msg.protocol_version != kProtocolVersion) {
                throw ProtocolError(ProtocolErrorCode::bad_version,
                                    "unsupported hello protocol version " +
                                        std::to_string(msg.protocol_version));
            }
            return msg;
        }
        case MessageType::snapshot: {
            const std::uint64_t population_size = reader.u64("snapshot population size");
            const std::uint32_t length = reader.u32("snapshot length");
            const auto packed = reader.rest();
            SnapshotMsg msg{decode_counts(packed, population_size, length)};
            return msg;
        }
        case MessageType::delta: {
            DeltaMsg msg;
            msg.report.evaluations = reader.u64("delta evaluation count");
            const std::uint32_t entries = reader.u32("delta entry count");
            msg.report.entries.reserve(std::min<std::uint32_t>(entries, 1u << 20));
            std::uint32_t previous_gene = 0;
            for (std::uint32_t i = 0; i < entries; ++i) {
                DeltaEntry entry;
                entry.gene = reader.u32("delta entry gene");
                entry.delta = static_cast<std::int32_t>(reader.u32("delta entry value"));
                if (entry.delta == 0) {
                    throw ProtocolError(ProtocolErrorCode::bad_report,
                                        "zero delta at gene " + std::to_string(entry.gene));
                }
                if (i > 0 && entry.gene <= previous_gene) {
                    throw ProtocolError(ProtocolErrorCode::bad_report,
                                        "delta entries not strictly ascending");
                }
                previous_gene = entry.gene;
                msg.report.entries.push_back(entry);
            }
            msg.best_fitness = reader.f64("delta best fitness");
            reader.finish("delta");
            return msg;
        }
        case MessageType::update: {
            UpdateMsg msg;
            const auto rest = reader.rest();
            msg.packed_counts.assign(rest.begin(), rest.end());
            return msg;
        }
        case MessageType::terminate: {
            const std::uint8_t code = reader.u8("terminate reason");
            reader.finish("terminate");
            if (code < static_cast<std::uint8_t>(TerminateReason::solved) ||
                code > static_cast<std::uint8_t>(TerminateReason::shutdown)) {
                throw ProtocolError(ProtocolErrorCode::bad_payload,
                                    "unknown terminate reason " + std::to_string(code));
            }
            return TerminateMsg{static_cast<TerminateReason>(code)};
        }
    }
    throw ProtocolError(ProtocolErrorCode::bad_type, "unknown message type");
}

Message unframe(std::span<const std::uint8_t> bytes) {
    const FrameHeader header = parse_frame_header(bytes);
    const std::size_t total = kFrameHeaderSize + header.payload_size;
    if (bytes.size() < total) {
        throw ProtocolError(ProtocolErrorCode::truncated,
                            "frame shorter than its declared payload length");
    }
    if (bytes.size() > total) {
        throw ProtocolError(ProtocolErrorCode::trailing_data, "bytes after the frame payload");
    }
    return parse_payload(header.type, bytes.subspan(kFrameHeaderSize, header.payload_size));
}

}  // namespace pcga
