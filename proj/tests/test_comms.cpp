#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <map>
#include <memory>
#include <thread>
#include <vector>

#include "pushrl/comms/channel.hpp"
#include "pushrl/comms/envelope.hpp"
#include "pushrl/comms/tcp.hpp"
#include "pushrl/util/rng.hpp"
#include "pushrl/util/time.hpp"

using namespace pushrl;

namespace {

Envelope random_envelope(Rng& rng, size_t max_payload = 64) {
    Envelope e;
    e.kind = static_cast<MsgKind>(rng.bounded(3));
    e.sender_id = static_cast<uint32_t>(rng.next_u64());
    e.version = rng.next_u64();
    e.payload.resize(rng.bounded(max_payload + 1));
    for (auto& b : e.payload) b = static_cast<uint8_t>(rng.next_u64());
    return e;
}

Transition random_transition(Rng& rng, size_t dim) {
    Transition t;
    t.obs.resize(dim);
    t.next_obs.resize(dim);
    for (auto& x : t.obs) x = rng.uniform_f32(-10.0f, 10.0f);
    for (auto& x : t.next_obs) x = rng.uniform_f32(-10.0f, 10.0f);
    t.action = static_cast<int>(rng.bounded(4));
    t.reward = rng.uniform_f32(-1.0f, 1.0f);
    t.done = rng.bounded(2) == 0;
    t.truncated = !t.done && rng.bounded(4) == 0;
    t.policy_version = rng.bounded(1000);
    t.produced_at_ns = static_cast<int64_t>(rng.next_u64() >> 1);
    return t;
}

bool same_transition(const Transition& a, const Transition& b) {
    return a.obs == b.obs && a.next_obs == b.next_obs && a.action == b.action &&
           a.reward == b.reward && a.done == b.done &&
           a.truncated == b.truncated && a.policy_version == b.policy_version &&
           a.produced_at_ns == b.produced_at_ns;
}

}  // namespace

TEST_CASE("frame layout: empty payload is a 17-byte frame") {
    Envelope e{MsgKind::control, 7, 42, {}};
    const auto frame = encode(e);
    CHECK(frame.size() == 17);
    // length prefix of 0, big-endian
    CHECK(frame[0] == 0);
    CHECK(frame[3] == 0);
    CHECK(frame[4] == 2);  // kind tag
    // sender_id 7 big-endian at bytes 5..8
    CHECK(frame[5] == 0);
    CHECK(frame[8] == 7);
    // version 42 big-endian at bytes 9..16
    CHECK(frame[16] == 42);
    CHECK(decode(frame) == e);
}

TEST_CASE("frame layout: 512 KB payload frame size") {
    Envelope e;
    e.kind = MsgKind::trajectory;
    e.payload.assign(512 * 1024, 0xAB);
    const auto frame = encode(e);
    CHECK(frame.size() == 512 * 1024 + 17);
    CHECK(decode(frame) == e);
}

TEST_CASE("codec round-trips randomized envelopes") {
    Rng rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const Envelope e = random_envelope(rng);
        CHECK(decode(encode(e)) == e);
    }
}

TEST_CASE("decode rejects malformed frames") {
    CHECK_THROWS_AS((void)decode(std::vector<uint8_t>(10, 0)),
                    std::invalid_argument);

    Envelope e{MsgKind::params, 1, 2, {1, 2, 3}};
    auto frame = encode(e);
    frame.pop_back();  // truncate
    CHECK_THROWS_AS((void)decode(frame), std::invalid_argument);

    frame = encode(e);
    frame[4] = 9;  // unknown kind tag
    CHECK_THROWS_AS((void)decode(frame), std::invalid_argument);

    frame = encode(e);
    frame[3] = 99;  // length prefix disagrees with actual size
    CHECK_THROWS_AS((void)decode(frame), std::invalid_argument);
}

TEST_CASE("trajectory, params and control payloads round-trip") {
    Rng rng(31);
    std::vector<Transition> trs;
    for (int i = 0; i < 20; ++i) trs.push_back(random_transition(rng, 4));
    TrajKind tk;
    const auto back =
        transitions_from_payload(payload_from_transitions(trs, TrajKind::batch),
                                 &tk);
    CHECK(tk == TrajKind::batch);
    REQUIRE(back.size() == trs.size());
    for (size_t i = 0; i < trs.size(); ++i) {
        CHECK(same_transition(back[i], trs[i]));
    }

    std::vector<float> params(1000);
    for (auto& p : params) p = rng.uniform_f32(-5.0f, 5.0f);
    CHECK(params_from_payload(payload_from_params(params)) == params);

    uint64_t arg = 0;
    const auto ctl = payload_from_control(ControlCode::pace_actor, 123456);
    CHECK(control_from_payload(ctl, &arg) == ControlCode::pace_actor);
    CHECK(arg == 123456);

    // Convenience constructors stamp header fields.
    const Envelope msg = make_trajectory_msg(3, 17, trs);
    CHECK(msg.kind == MsgKind::trajectory);
    CHECK(msg.sender_id == 3);
    CHECK(msg.version == 17);
}

TEST_CASE("probe on an empty channel returns immediately") {
    auto ch = std::make_shared<Channel>(16);
    InProcSender sender(ch);
    InProcReceiver receiver(ch);
    Envelope out;
    const int64_t t0 = now_ns();
    CHECK(receiver.probe(out) == ProbeStatus::empty);
    CHECK(now_ns() - t0 < 1'000'000);  // < 1 ms

    sender.send(make_control_msg(0, ControlCode::stop));
    CHECK(receiver.probe(out) == ProbeStatus::message);
    CHECK(receiver.probe(out) == ProbeStatus::empty);
}

TEST_CASE("send returns without waiting on a sleepy receiver") {
    auto ch = std::make_shared<Channel>(1024);
    InProcSender sender(ch);
    InProcReceiver receiver(ch);

    std::atomic<int> received{0};
    std::thread consumer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(300));
        Envelope out;
        while (true) {
            const auto st = receiver.probe(out);
            if (st == ProbeStatus::message) {
                ++received;
            } else if (st == ProbeStatus::closed) {
                break;
            } else {
                std::this_thread::yield();
            }
        }
    });

    Envelope e{MsgKind::params, 1, 0, std::vector<uint8_t>(1024, 7)};
    const int64_t t0 = now_ns();
    for (int i = 0; i < 500; ++i) {
        e.version = static_cast<uint64_t>(i);
        sender.send(e);
    }
    const double sender_elapsed = seconds_since(t0);
    sender.close();
    consumer.join();
    // The consumer slept 300 ms; the sender must not have been coupled to it.
    CHECK(sender_elapsed < 0.15);
    CHECK(received.load() == 500);
}

TEST_CASE("two interleaved senders each keep their own order") {
    auto ch = std::make_shared<Channel>(64);
    InProcReceiver receiver(ch);

    // Senders are registered before the consumer starts draining.
    auto sa = std::make_unique<InProcSender>(ch);
    auto sb = std::make_unique<InProcSender>(ch);
    auto produce = [](std::unique_ptr<InProcSender> sender, uint32_t id) {
        for (int i = 0; i < 1000; ++i) {
            sender->send({MsgKind::control, id, static_cast<uint64_t>(i), {}});
        }
    };
    std::thread a(produce, std::move(sa), 1), b(produce, std::move(sb), 2);

    std::map<uint32_t, uint64_t> next_version;
    int got = 0;
    Envelope out;
    while (true) {
        const auto st = receiver.probe(out);
        if (st == ProbeStatus::message) {
            CHECK(out.version == next_version[out.sender_id]);
            ++next_version[out.sender_id];
            ++got;
        } else if (st == ProbeStatus::closed) {
            break;
        } else {
            std::this_thread::yield();
        }
    }
    a.join();
    b.join();
    CHECK(got == 2000);
    CHECK(next_version[1] == 1000);
    CHECK(next_version[2] == 1000);

    const auto stats = receiver.stats();
    CHECK(stats.sent_count == 2000);
    CHECK(stats.received_count == 2000);
    CHECK(stats.in_flight == 0);
}

TEST_CASE("conservation: sent = received + in-flight") {
    auto ch = std::make_shared<Channel>(64);
    InProcSender sender(ch);
    InProcReceiver receiver(ch);
    for (int i = 0; i < 40; ++i) {
        sender.send(make_control_msg(0, ControlCode::stop));
    }
    Envelope out;
    for (int i = 0; i < 15; ++i) {
        REQUIRE(receiver.probe(out) == ProbeStatus::message);
    }
    const auto stats = receiver.stats();
    CHECK(stats.sent_count == 40);
    CHECK(stats.received_count == 15);
    CHECK(stats.in_flight == 25);
    CHECK(stats.received_count + stats.in_flight == stats.sent_count);
}

TEST_CASE("a full channel blocks only the saturated sender") {
    auto ch = std::make_shared<Channel>(4);
    InProcSender sender(ch);
    InProcReceiver receiver(ch);

    std::atomic<bool> done{false};
    std::thread producer([&] {
        for (int i = 0; i < 10; ++i) {
            sender.send(make_control_msg(0, ControlCode::stop));
        }
        done = true;
    });

    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    CHECK_FALSE(done.load());                 // blocked at saturation
    CHECK(receiver.stats().sent_count == 4);  // exactly depth got through

    Envelope out;
    int received = 0;
    while (received < 10) {
        if (receiver.probe(out) == ProbeStatus::message) {
            ++received;
        } else {
            std::this_thread::yield();
        }
    }
    producer.join();
    CHECK(done.load());
}

TEST_CASE("closing the channel wakes and fails a blocked sender") {
    auto ch = std::make_shared<Channel>(2);
    InProcSender sender(ch);

    std::atomic<bool> threw{false};
    std::thread producer([&] {
        try {
            for (int i = 0; i < 10; ++i) {
                sender.send(make_control_msg(0, ControlCode::stop));
            }
        } catch (const ChannelClosedError&) {
            threw = true;
        }
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    ch->close();
    producer.join();
    CHECK(threw.load());
    CHECK_THROWS_AS(sender.send(make_control_msg(0, ControlCode::stop)),
                    ChannelClosedError);
}

TEST_CASE("receiver sees closed only after draining finished senders") {
    auto ch = std::make_shared<Channel>(16);
    auto sender = std::make_unique<InProcSender>(ch);
    InProcReceiver receiver(ch);
    sender->send(make_control_msg(0, ControlCode::stop));
    sender->send(make_control_msg(0, ControlCode::stop));
    sender.reset();  // sender gone, two messages still queued

    Envelope out;
    CHECK(receiver.probe(out) == ProbeStatus::message);
    CHECK(receiver.probe(out) == ProbeStatus::message);
    CHECK(receiver.probe(out) == ProbeStatus::closed);
}

TEST_CASE("param slot: newest wins, stale versions are dropped") {
    ParamSub sub;
    CHECK_FALSE(sub.latest().has_value());

    sub.publish({3, {1.0f}});
    sub.publish({5, {2.0f}});
    auto got = sub.latest();
    REQUIRE(got.has_value());
    CHECK(got->version == 5);
    CHECK(sub.dropped_stale_count() == 1);
    CHECK_FALSE(sub.latest().has_value());

    // Older-than-delivered and older-than-pending both drop.
    sub.publish({4, {3.0f}});
    CHECK_FALSE(sub.latest().has_value());
    sub.publish({8, {4.0f}});
    sub.publish({7, {5.0f}});
    got = sub.latest();
    REQUIRE(got.has_value());
    CHECK(got->version == 8);
    CHECK(sub.dropped_stale_count() == 3);
}

TEST_CASE("param slot: delivered versions strictly increase") {
    ParamSub sub;
    Rng rng(88);
    uint64_t last = 0;
    bool any = false;
    for (int i = 0; i < 5000; ++i) {
        sub.publish({rng.bounded(500), {}});
        if (rng.bounded(3) == 0) {
            if (auto ps = sub.latest()) {
                if (any) CHECK(ps->version > last);
                last = ps->version;
                any = true;
            }
        }
    }
    // Conservation: everything published was delivered, dropped, or pending.
    const uint64_t pending = sub.latest().has_value() ? 1 : 0;
    CHECK(sub.published_count() ==
          sub.delivered_count() + pending + sub.dropped_stale_count());
}

TEST_CASE("tcp transport delivers the same stream as in-process") {
    Rng rng(555);
    std::vector<Envelope> messages;
    for (int i = 0; i < 200; ++i) {
        Envelope e = random_envelope(rng, 2000);
        e.sender_id = 1;
        e.version = static_cast<uint64_t>(i);
        messages.push_back(std::move(e));
    }
    // One big frame to exercise multi-read reassembly.
    Envelope big;
    big.kind = MsgKind::params;
    big.sender_id = 1;
    big.version = 200;
    big.payload.assign(512 * 1024, 0x5C);
    messages.push_back(big);

    // In-process run.
    std::vector<Envelope> via_channel;
    {
        auto ch = std::make_shared<Channel>(1024);
        InProcSender sender(ch);
        InProcReceiver receiver(ch);
        for (const auto& m : messages) sender.send(m);
        sender.close();
        Envelope out;
        while (receiver.probe(out) == ProbeStatus::message) {
            via_channel.push_back(out);
        }
    }

    // Loopback TCP run, sender in its own thread.
    std::vector<Envelope> via_tcp;
    {
        TcpReceiver receiver;
        std::thread producer([&, port = receiver.port()] {
            TcpSender sender(port);
            for (const auto& m : messages) sender.send(m);
            sender.close();
        });
        receiver.accept_senders(1);
        Envelope out;
        while (true) {
            const auto st = receiver.probe(out);
            if (st == ProbeStatus::message) {
                via_tcp.push_back(out);
            } else if (st == ProbeStatus::closed) {
                break;
            } else {
                std::this_thread::yield();
            }
        }
        producer.join();
        CHECK(receiver.stats().received_count == messages.size());
    }

    REQUIRE(via_channel.size() == messages.size());
    REQUIRE(via_tcp.size() == messages.size());
    for (size_t i = 0; i < messages.size(); ++i) {
        CHECK(via_channel[i] == messages[i]);
        CHECK(via_tcp[i] == messages[i]);
    }
}

TEST_CASE("tcp preserves per-sender order across two senders") {
    TcpReceiver receiver;
    auto produce = [port = receiver.port()](uint32_t id) {
        TcpSender sender(port);
        Envelope e{MsgKind::control, id, 0, std::vector<uint8_t>(64, 1)};
        for (int i = 0; i < 500; ++i) {
            e.version = static_cast<uint64_t>(i);
            sender.send(e);
        }
    };
    std::thread a(produce, 1), b(produce, 2);
    receiver.accept_senders(2);

    std::map<uint32_t, uint64_t> next_version;
    int got = 0;
    Envelope out;
    while (true) {
        const auto st = receiver.probe(out);
        if (st == ProbeStatus::message) {
            CHECK(out.version == next_version[out.sender_id]);
            ++next_version[out.sender_id];
            ++got;
        } else if (st == ProbeStatus::closed) {
            break;
        } else {
            std::this_thread::yield();
        }
    }
    a.join();
    b.join();
    CHECK(got == 1000);
    CHECK(next_version[1] == 500);
    CHECK(next_version[2] == 500);
}

TEST_CASE("probe/push soak: no deadlock over 100k messages") {
    auto ch = std::make_shared<Channel>(128);
    InProcReceiver receiver(ch);
    constexpr int kPerSender = 50000;

    auto sa = std::make_unique<InProcSender>(ch);
    auto sb = std::make_unique<InProcSender>(ch);
    auto produce = [](std::unique_ptr<InProcSender> sender, uint32_t id) {
        Envelope e{MsgKind::control, id, 0, std::vector<uint8_t>(16, 0)};
        for (int i = 0; i < kPerSender; ++i) {
            e.version = static_cast<uint64_t>(i);
            sender->send(e);
        }
    };
    std::thread a(produce, std::move(sa), 1), b(produce, std::move(sb), 2);

    uint64_t got = 0;
    Envelope out;
    while (true) {
        const auto st = receiver.probe(out);
        if (st == ProbeStatus::message) {
            ++got;
        } else if (st == ProbeStatus::closed) {
            break;
        } else {
            std::this_thread::yield();
        }
    }
    a.join();
    b.join();
    CHECK(got == 2 * kPerSender);
}
