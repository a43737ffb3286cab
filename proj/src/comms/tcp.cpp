#include "pushrl/comms/tcp.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "pushrl/util/time.hpp"

namespace pushrl {

namespace {

[[noreturn]] void fail_errno(const char* what) {
    throw std::runtime_error(std::string(what) + ": " + std::strerror(errno));
}

void set_nodelay(int fd) {
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void set_nonblocking(int fd) {
    const int flags = fcntl(fd, F_GETFL, 0);
    if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
        fail_errno("tcp: fcntl O_NONBLOCK");
    }
}

sockaddr_in loopback_addr(uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    return addr;
}

constexpr size_t kReadChunk = 256 * 1024;

}  // namespace

TcpReceiver::TcpReceiver(uint16_t port) {
    listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) fail_errno("tcp: socket");
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = loopback_addr(port);
    if (bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
        0) {
        fail_errno("tcp: bind");
    }
    if (listen(listen_fd_, 64) < 0) fail_errno("tcp: listen");
    socklen_t len = sizeof(addr);
    if (getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) <
        0) {
        fail_errno("tcp: getsockname");
    }
    port_ = ntohs(addr.sin_port);
}

TcpReceiver::~TcpReceiver() {
    for (Conn& c : conns_) {
        if (c.fd >= 0) ::close(c.fd);
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpReceiver::accept_senders(size_t n) {
    conns_.reserve(conns_.size() + n);
    for (size_t i = 0; i < n; ++i) {
        const int fd = accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) fail_errno("tcp: accept");
        set_nodelay(fd);
        set_nonblocking(fd);
        Conn conn;
        conn.fd = fd;
        conns_.push_back(std::move(conn));
    }
    accepted_ = true;
    ::close(listen_fd_);
    listen_fd_ = -1;
}

bool TcpReceiver::extract_frame(Conn& conn, Envelope& out) {
    const size_t available = conn.buf.size() - conn.offset;
    if (available < kFrameHeaderSize) return false;
    const uint8_t* p = conn.buf.data() + conn.offset;
    const uint32_t payload_len = (uint32_t{p[0]} << 24) |
                                 (uint32_t{p[1]} << 16) |
                                 (uint32_t{p[2]} << 8) | uint32_t{p[3]};
    const size_t total = kFrameHeaderSize + payload_len;
    if (available < total) return false;
    out = decode(p, total);
    conn.offset += total;
    // Reclaim consumed space once it dominates the buffer.
    if (conn.offset > (1u << 20) && conn.offset * 2 > conn.buf.size()) {
        conn.buf.erase(conn.buf.begin(),
                       conn.buf.begin() + static_cast<long>(conn.offset));
        conn.offset = 0;
    }
    return true;
}

ProbeStatus TcpReceiver::probe(Envelope& out) {
    if (!accepted_) return ProbeStatus::empty;
    const int64_t t0 = now_ns();

    // Serve already-buffered frames first, round-robin across senders.
    const size_t n = conns_.size();
    for (size_t i = 0; i < n; ++i) {
        Conn& conn = conns_[(next_conn_ + i) % n];
        if (extract_frame(conn, out)) {
            next_conn_ = (next_conn_ + i + 1) % n;
            std::lock_guard<std::mutex> lock(stats_mutex_);
            ++stats_.received_count;
            stats_.recv_busy_ns += now_ns() - t0;
            return ProbeStatus::message;
        }
    }

    // Pull whatever the kernel has ready.
    bool read_any = false;
    std::vector<pollfd> fds;
    fds.reserve(n);
    for (const Conn& c : conns_) {
        if (!c.eof) fds.push_back({c.fd, POLLIN, 0});
    }
    if (!fds.empty()) {
        (void)poll(fds.data(), fds.size(), 0);
        size_t fi = 0;
        for (Conn& conn : conns_) {
            if (conn.eof) continue;
            const bool readable = fds[fi].revents & (POLLIN | POLLHUP | POLLERR);
            ++fi;
            if (!readable) continue;
            static thread_local std::vector<uint8_t> chunk(kReadChunk);
            while (true) {
                const ssize_t got = read(conn.fd, chunk.data(), chunk.size());
                if (got > 0) {
                    read_any = true;
                    conn.buf.insert(conn.buf.end(), chunk.data(),
                                    chunk.data() + got);
                    if (static_cast<size_t>(got) < chunk.size()) break;
                } else if (got == 0) {
                    conn.eof = true;
                    break;
                } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
                    break;
                } else if (errno == EINTR) {
                    continue;
                } else {
                    fail_errno("tcp: read");
                }
            }
        }
    }

    for (size_t i = 0; i < n; ++i) {
        Conn& conn = conns_[(next_conn_ + i) % n];
        if (extract_frame(conn, out)) {
            next_conn_ = (next_conn_ + i + 1) % n;
            std::lock_guard<std::mutex> lock(stats_mutex_);
            ++stats_.received_count;
            stats_.recv_busy_ns += now_ns() - t0;
            return ProbeStatus::message;
        }
    }

    // A probe that pulled bytes without completing a frame still did real
    // receive work (partial large frames); count it as busy so the measured
    // per-message receive cost reflects the full copy, not just the probe
    // that happened to finish the frame.
    if (read_any) {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        stats_.recv_busy_ns += now_ns() - t0;
    }

    bool all_done = true;
    for (const Conn& conn : conns_) {
        if (!conn.eof) {
            all_done = false;
        } else if (conn.buf.size() != conn.offset) {
            throw std::runtime_error("tcp: sender closed mid-frame");
        }
    }
    return all_done ? ProbeStatus::closed : ProbeStatus::empty;
}

ChannelStats TcpReceiver::stats() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return stats_;
}

TcpSender::TcpSender(uint16_t port) {
    fd_ = socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail_errno("tcp: socket");
    sockaddr_in addr = loopback_addr(port);
    const int64_t deadline = now_ns() + int64_t{5} * 1'000'000'000;
    while (connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
           0) {
        if ((errno == ECONNREFUSED || errno == EINTR) && now_ns() < deadline) {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            continue;
        }
        fail_errno("tcp: connect");
    }
    set_nodelay(fd_);
}

TcpSender::~TcpSender() {
    close();
}

void TcpSender::send(const Envelope& e) {
    if (fd_ < 0) throw ChannelClosedError();
    const int64_t t0 = now_ns();
    const std::vector<uint8_t> frame = encode(e);
    size_t off = 0;
    while (off < frame.size()) {
        const ssize_t wrote =
            ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
        if (wrote < 0) {
            if (errno == EINTR) continue;
            if (errno == EPIPE || errno == ECONNRESET) {
                throw ChannelClosedError();
            }
            fail_errno("tcp: send");
        }
        off += static_cast<size_t>(wrote);
    }
    std::lock_guard<std::mutex> lock(stats_mutex_);
    ++stats_.sent_count;
    stats_.bytes_sent += frame.size();
    stats_.send_busy_ns += now_ns() - t0;
}

void TcpSender::close() {
    if (fd_ >= 0) {
        shutdown(fd_, SHUT_WR);
        ::close(fd_);
        fd_ = -1;
    }
}

ChannelStats TcpSender::stats() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return stats_;
}

}  // namespace pushrl
