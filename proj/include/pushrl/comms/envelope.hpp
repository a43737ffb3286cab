#pragma once

#include <cstdint>
#include <vector>

#include "pushrl/core/types.hpp"

namespace pushrl {

// Versioned, immutable parameter snapshot exchanged between workers.
struct ParamSet {
    uint64_t version = 0;
    std::vector<float> data;

    bool operator==(const ParamSet&) const = default;
};

// Message kinds carried by every transport.
enum class MsgKind : uint8_t { trajectory = 0, params = 1, control = 2 };

// Control verbs carried in a control-kind payload.
enum class ControlCode : uint8_t {
    batch_request = 0,       // learner -> buffer: send me one batch
    insufficient_warmup = 1, // buffer -> learner: not enough data yet
    pace_actor = 2,          // controller -> actor: arg = max steps/s
    pace_learner = 3,        // controller -> learner: arg = max updates/s
    stop = 4,                // orchestrator -> worker: shut down
};

// Trajectory payload flavors (same transition list format).
enum class TrajKind : uint8_t { rollout = 0, batch = 1 };

// One framed message.  Wire layout, integers big-endian:
//   [length_prefix u32][kind u8][sender_id u32][version u64][payload]
// length_prefix counts payload bytes only, so an empty payload is a 17-byte
// frame.  Payload contents are little-endian.
struct Envelope {
    MsgKind kind = MsgKind::control;
    uint32_t sender_id = 0;
    uint64_t version = 0;
    std::vector<uint8_t> payload;

    bool operator==(const Envelope&) const = default;
};

constexpr size_t kFrameHeaderSize = 17;
constexpr uint64_t kMaxPayloadSize = (uint64_t{1} << 32) - kFrameHeaderSize;

// Serializes to a frame.  Throws std::length_error when the payload exceeds
// kMaxPayloadSize.
std::vector<uint8_t> encode(const Envelope& e);

// Parses one complete frame.  Throws std::invalid_argument on truncated or
// inconsistent input.
Envelope decode(const uint8_t* data, size_t size);
Envelope decode(const std::vector<uint8_t>& frame);

// Frame size for a payload of n bytes.
inline size_t frame_size(size_t payload_bytes) {
    return payload_bytes + kFrameHeaderSize;
}

// Payload builders/parsers.  All multi-byte payload values little-endian.
std::vector<uint8_t> payload_from_transitions(
    const std::vector<Transition>& trs, TrajKind traj_kind);
std::vector<Transition> transitions_from_payload(
    const std::vector<uint8_t>& payload, TrajKind* traj_kind = nullptr);

std::vector<uint8_t> payload_from_params(const std::vector<float>& params);
std::vector<float> params_from_payload(const std::vector<uint8_t>& payload);

std::vector<uint8_t> payload_from_control(ControlCode code, uint64_t arg = 0);
ControlCode control_from_payload(const std::vector<uint8_t>& payload,
                                 uint64_t* arg = nullptr);

// Convenience constructors for the three message families.
Envelope make_trajectory_msg(uint32_t sender_id, uint64_t version,
                             const std::vector<Transition>& trs,
                             TrajKind traj_kind = TrajKind::rollout);
Envelope make_params_msg(uint32_t sender_id, const ParamSet& ps);
Envelope make_control_msg(uint32_t sender_id, ControlCode code,
                          uint64_t arg = 0);

}  // namespace pushrl
