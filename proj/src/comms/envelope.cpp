#include "pushrl/comms/envelope.hpp"

#include <cstring>
#include <stdexcept>

namespace pushrl {

namespace {

// -- big-endian header ints ------------------------------------------------

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u64_be(std::vector<uint8_t>& out, uint64_t v) {
    put_u32_be(out, static_cast<uint32_t>(v >> 32));
    put_u32_be(out, static_cast<uint32_t>(v));
}

uint32_t get_u32_be(const uint8_t* p) {
    return (uint32_t{p[0]} << 24) | (uint32_t{p[1]} << 16) |
           (uint32_t{p[2]} << 8) | uint32_t{p[3]};
}

uint64_t get_u64_be(const uint8_t* p) {
    return (uint64_t{get_u32_be(p)} << 32) | get_u32_be(p + 4);
}

// -- little-endian payload scalars ------------------------------------------

struct Writer {
    std::vector<uint8_t>& out;

    void u8(uint8_t v) { out.push_back(v); }
    void u32(uint32_t v) {
        out.push_back(static_cast<uint8_t>(v));
        out.push_back(static_cast<uint8_t>(v >> 8));
        out.push_back(static_cast<uint8_t>(v >> 16));
        out.push_back(static_cast<uint8_t>(v >> 24));
    }
    void u64(uint64_t v) {
        u32(static_cast<uint32_t>(v));
        u32(static_cast<uint32_t>(v >> 32));
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f32s(const std::vector<float>& v) {
        u32(static_cast<uint32_t>(v.size()));
        for (float x : v) f32(x);
    }
};

struct Reader {
    const uint8_t* p;
    size_t left;

    void need(size_t n) const {
        if (left < n) {
            throw std::invalid_argument("payload truncated");
        }
    }
    uint8_t u8() {
        need(1);
        --left;
        return *p++;
    }
    uint32_t u32() {
        need(4);
        const uint32_t v = uint32_t{p[0]} | (uint32_t{p[1]} << 8) |
                           (uint32_t{p[2]} << 16) | (uint32_t{p[3]} << 24);
        p += 4;
        left -= 4;
        return v;
    }
    uint64_t u64() {
        const uint64_t lo = u32();
        return lo | (uint64_t{u32()} << 32);
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::vector<float> f32s() {
        const uint32_t n = u32();
        need(size_t{n} * 4);
        std::vector<float> v(n);
        for (uint32_t i = 0; i < n; ++i) v[i] = f32();
        return v;
    }
};

}  // namespace

std::vector<uint8_t> encode(const Envelope& e) {
    if (e.payload.size() > kMaxPayloadSize) {
        throw std::length_error("envelope payload exceeds 2^32-17 bytes");
    }
    std::vector<uint8_t> frame;
    frame.reserve(frame_size(e.payload.size()));
    put_u32_be(frame, static_cast<uint32_t>(e.payload.size()));
    frame.push_back(static_cast<uint8_t>(e.kind));
    put_u32_be(frame, e.sender_id);
    put_u64_be(frame, e.version);
    frame.insert(frame.end(), e.payload.begin(), e.payload.end());
    return frame;
}

Envelope decode(const uint8_t* data, size_t size) {
    if (size < kFrameHeaderSize) {
        throw std::invalid_argument("frame shorter than header");
    }
    const uint32_t payload_len = get_u32_be(data);
    if (size != kFrameHeaderSize + payload_len) {
        throw std::invalid_argument("frame length does not match prefix");
    }
    const uint8_t kind = data[4];
    if (kind > static_cast<uint8_t>(MsgKind::control)) {
        throw std::invalid_argument("unknown message kind " +
                                    std::to_string(kind));
    }
    Envelope e;
    e.kind = static_cast<MsgKind>(kind);
    e.sender_id = get_u32_be(data + 5);
    e.version = get_u64_be(data + 9);
    e.payload.assign(data + kFrameHeaderSize, data + size);
    return e;
}

Envelope decode(const std::vector<uint8_t>& frame) {
    return decode(frame.data(), frame.size());
}

std::vector<uint8_t> payload_from_transitions(
    const std::vector<Transition>& trs, TrajKind traj_kind) {
    std::vector<uint8_t> out;
    Writer w{out};
    w.u8(static_cast<uint8_t>(traj_kind));
    w.u32(static_cast<uint32_t>(trs.size()));
    for (const Transition& t : trs) {
        w.f32s(t.obs);
        w.f32s(t.next_obs);
        w.u32(static_cast<uint32_t>(t.action));
        w.f32(t.reward);
        w.u8(static_cast<uint8_t>((t.done ? 1 : 0) | (t.truncated ? 2 : 0)));
        w.u64(t.policy_version);
        w.u64(static_cast<uint64_t>(t.produced_at_ns));
    }
    return out;
}

std::vector<Transition> transitions_from_payload(
    const std::vector<uint8_t>& payload, TrajKind* traj_kind) {
    Reader r{payload.data(), payload.size()};
    const uint8_t tk = r.u8();
    if (tk > static_cast<uint8_t>(TrajKind::batch)) {
        throw std::invalid_argument("unknown trajectory payload kind");
    }
    if (traj_kind) *traj_kind = static_cast<TrajKind>(tk);
    const uint32_t count = r.u32();
    std::vector<Transition> trs(count);
    for (uint32_t i = 0; i < count; ++i) {
        Transition& t = trs[i];
        t.obs = r.f32s();
        t.next_obs = r.f32s();
        t.action = static_cast<int>(r.u32());
        t.reward = r.f32();
        const uint8_t flags = r.u8();
        t.done = flags & 1;
        t.truncated = flags & 2;
        t.policy_version = r.u64();
        t.produced_at_ns = static_cast<int64_t>(r.u64());
    }
    if (r.left != 0) {
        throw std::invalid_argument("trailing bytes after trajectory payload");
    }
    return trs;
}

std::vector<uint8_t> payload_from_params(const std::vector<float>& params) {
    std::vector<uint8_t> out;
    out.reserve(4 + params.size() * 4);
    Writer w{out};
    w.f32s(params);
    return out;
}

std::vector<float> params_from_payload(const std::vector<uint8_t>& payload) {
    Reader r{payload.data(), payload.size()};
    auto v = r.f32s();
    if (r.left != 0) {
        throw std::invalid_argument("trailing bytes after params payload");
    }
    return v;
}

std::vector<uint8_t> payload_from_control(ControlCode code, uint64_t arg) {
    std::vector<uint8_t> out;
    Writer w{out};
    w.u8(static_cast<uint8_t>(code));
    w.u64(arg);
    return out;
}

ControlCode control_from_payload(const std::vector<uint8_t>& payload,
                                 uint64_t* arg) {
    Reader r{payload.data(), payload.size()};
    const uint8_t code = r.u8();
    if (code > static_cast<uint8_t>(ControlCode::stop)) {
        throw std::invalid_argument("unknown control code");
    }
    const uint64_t a = r.u64();
    if (arg) *arg = a;
    if (r.left != 0) {
        throw std::invalid_argument("trailing bytes after control payload");
    }
    return static_cast<ControlCode>(code);
}

Envelope make_trajectory_msg(uint32_t sender_id, uint64_t version,
                             const std::vector<Transition>& trs,
                             TrajKind traj_kind) {
    return {MsgKind::trajectory, sender_id, version,
            payload_from_transitions(trs, traj_kind)};
}

Envelope make_params_msg(uint32_t sender_id, const ParamSet& ps) {
    return {MsgKind::params, sender_id, ps.version,
            payload_from_params(ps.data)};
}

Envelope make_control_msg(uint32_t sender_id, ControlCode code, uint64_t arg) {
    return {MsgKind::control, sender_id, 0, payload_from_control(code, arg)};
}

}  // namespace pushrl
