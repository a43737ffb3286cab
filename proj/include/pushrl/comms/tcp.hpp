#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "pushrl/comms/channel.hpp"

namespace pushrl {

// Loopback TCP flavor of the push channel: N senders connect to one
// receiver.  Kernel socket buffers play the role of the bounded queue —
// writes block once they fill, which is the same saturation backpressure as
// the in-process transport.  Framing is the envelope codec, so the two
// transports deliver byte-identical messages.
class TcpReceiver final : public MsgReceiver {
public:
    // Binds 127.0.0.1:port and listens; port 0 picks an ephemeral port.
    explicit TcpReceiver(uint16_t port = 0);
    ~TcpReceiver() override;

    TcpReceiver(const TcpReceiver&) = delete;
    TcpReceiver& operator=(const TcpReceiver&) = delete;

    uint16_t port() const { return port_; }

    // Blocks until n senders have connected, then stops listening.
    void accept_senders(size_t n);

    ProbeStatus probe(Envelope& out) override;
    ChannelStats stats() const override;

private:
    struct Conn {
        int fd = -1;
        bool eof = false;
        std::vector<uint8_t> buf;
        size_t offset = 0;  // parse position within buf
    };

    bool extract_frame(Conn& conn, Envelope& out);

    int listen_fd_ = -1;
    uint16_t port_ = 0;
    bool accepted_ = false;
    std::vector<Conn> conns_;
    size_t next_conn_ = 0;  // round-robin fairness across senders
    mutable std::mutex stats_mutex_;
    ChannelStats stats_{};
};

class TcpSender final : public MsgSender {
public:
    // Connects to 127.0.0.1:port, retrying briefly while the receiver binds.
    explicit TcpSender(uint16_t port);
    ~TcpSender() override;

    TcpSender(const TcpSender&) = delete;
    TcpSender& operator=(const TcpSender&) = delete;

    void send(const Envelope& e) override;
    void close() override;
    ChannelStats stats() const override;

private:
    int fd_ = -1;
    mutable std::mutex stats_mutex_;
    ChannelStats stats_{};
};

}  // namespace pushrl
