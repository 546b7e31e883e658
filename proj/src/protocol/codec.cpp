#include "harnode/protocol.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace harnode::protocol {
namespace {

constexpr std::uint8_t kSyncRequestTag = 0x01;
constexpr std::uint8_t kSyncResponseTag = 0x02;

class Writer {
public:
    explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    template <typename U>
    void put(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return data_[pos_++]; }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }

private:
    template <typename U>
    U get() {
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            v |= static_cast<U>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(U);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

void check_samples(const std::vector<SensorSample>& samples) {
    if (samples.empty() || samples.size() > kMaxSamplesPerPacket) {
        throw InvalidArgument("sample_count must be in 1..30, got " + std::to_string(samples.size()));
    }
    for (const auto& s : samples) {
        if (!s.all_finite()) throw InvalidArgument("non-finite sample value");
    }
}

void write_samples(Writer& w, const std::vector<SensorSample>& samples) {
    for (const auto& s : samples) {
        for (float v : s.axes()) w.f32(v);
    }
}

std::vector<SensorSample> read_samples(Reader& r, std::size_t count) {
    std::vector<SensorSample> out(count);
    for (auto& s : out) {
        std::array<float, 9> a{};
        for (auto& v : a) v = r.f32();
        s = SensorSample::from_axes(a);
        if (!s.all_finite()) throw MalformedPacket("non-finite float in payload");
    }
    return out;
}

}  // namespace

SensorSample SensorSample::from_axes(const std::array<float, 9>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
}

bool SensorSample::all_finite() const {
    for (float v : axes()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::vector<std::uint8_t> encode_data_packet(const DataPacket& packet) {
    return std::visit(
        [](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            check_samples(p.samples);
            const auto count = p.samples.size();
            if constexpr (std::is_same_v<P, DataPacketV1>) {
                Writer w(v1_length(count));
                w.u8(p.node_id);
                w.u8(static_cast<std::uint8_t>(count));
                write_samples(w, p.samples);
                return w.take();
            } else {
                Writer w(v2_length(count));
                w.u8(p.node_id);
                w.u8(static_cast<std::uint8_t>(count));
                w.u32(p.seq);
                w.u64(p.t_first_us);
                write_samples(w, p.samples);
                return w.take();
            }
        },
        packet);
}

DataPacket decode_data_packet(std::span<const std::uint8_t> datagram) {
    const auto len = datagram.size();
    // 2 + 36n and 14 + 36m differ by 12 mod 36, so the length alone picks the version.
    if (len >= v1_length(1) && len <= v1_length(kMaxSamplesPerPacket) && (len - kV1HeaderBytes) % kSampleBytes == 0) {
        const auto implied = (len - kV1HeaderBytes) / kSampleBytes;
        Reader r(datagram);
        DataPacketV1 p;
        p.node_id = r.u8();
        if (r.u8() != implied) throw MalformedPacket("v1 sample_count disagrees with datagram length");
        p.samples = read_samples(r, implied);
        return p;
    }
    if (len >= v2_length(1) && len <= v2_length(kMaxSamplesPerPacket) && (len - kV2HeaderBytes) % kSampleBytes == 0) {
        const auto implied = (len - kV2HeaderBytes) / kSampleBytes;
        Reader r(datagram);
        DataPacketV2 p;
        p.node_id = r.u8();
        if (r.u8() != implied) throw MalformedPacket("v2 sample_count disagrees with datagram length");
        p.seq = r.u32();
        p.t_first_us = r.u64();
        p.samples = read_samples(r, implied);
        return p;
    }
    throw MalformedPacket("datagram length " + std::to_string(len) + " is not a data packet length");
}

std::uint8_t node_id_of(const DataPacket& packet) {
    return std::visit([](const auto& p) { return p.node_id; }, packet);
}

const std::vector<SensorSample>& samples_of(const DataPacket& packet) {
    return std::visit([](const auto& p) -> const std::vector<SensorSample>& { return p.samples; }, packet);
}

std::vector<std::uint8_t> encode_sync(const SyncMessage& msg) {
    if (const auto* req = std::get_if<SyncRequest>(&msg)) {
        Writer w(kSyncRequestBytes);
        w.u8(kSyncRequestTag);
        w.u8(req->node_id);
        w.u64(req->t1_us);
        return w.take();
    }
    const auto& resp = std::get<SyncResponse>(msg);
    if (resp.t3_us < resp.t2_us) throw InvalidArgument("sync response with t3 < t2");
    Writer w(kSyncResponseBytes);
    w.u8(kSyncResponseTag);
    w.u64(resp.t1_us);
    w.u64(resp.t2_us);
    w.u64(resp.t3_us);
    return w.take();
}

SyncMessage decode_sync(std::span<const std::uint8_t> datagram) {
    Reader r(datagram);
    if (datagram.size() == kSyncRequestBytes) {
        if (r.u8() != kSyncRequestTag) throw MalformedPacket("bad sync request tag");
        SyncRequest req;
        req.node_id = r.u8();
        req.t1_us = r.u64();
        return req;
    }
    if (datagram.size() == kSyncResponseBytes) {
        if (r.u8() != kSyncResponseTag) throw MalformedPacket("bad sync response tag");
        SyncResponse resp;
        resp.t1_us = r.u64();
        resp.t2_us = r.u64();
        resp.t3_us = r.u64();
        if (resp.t3_us < resp.t2_us) throw MalformedPacket("sync response with t3 < t2");
        return resp;
    }
    throw MalformedPacket("sync datagram of length " + std::to_string(datagram.size()));
}

std::vector<std::uint8_t> encode_control(const ControlMessage& msg) {
    switch (msg.kind) {
        case ControlKind::StartRecording:
        case ControlKind::StopRecording:
        case ControlKind::Identify:
            break;
        default:
            throw InvalidArgument("unknown control kind");
    }
    Writer w(kControlBytes);
    w.u8(static_cast<std::uint8_t>(msg.kind));
    w.u32(msg.session_id);
    w.u64(msg.issued_at_us);
    return w.take();
}

ControlMessage decode_control(std::span<const std::uint8_t> datagram) {
    if (datagram.size() != kControlBytes) {
        throw MalformedPacket("control datagram of length " + std::to_string(datagram.size()));
    }
    Reader r(datagram);
    const auto kind = r.u8();
    if (kind < 1 || kind > 3) throw MalformedPacket("unknown control kind " + std::to_string(kind));
    ControlMessage msg;
    msg.kind = static_cast<ControlKind>(kind);
    msg.session_id = r.u32();
    msg.issued_at_us = r.u64();
    return msg;
}

}  // namespace harnode::protocol
