#include "agility/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <list>
#include <mutex>
#include <thread>
#include <vector>

#include "agility/errors.hpp"

namespace agility {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kPollSliceMs = 100;
constexpr std::size_t kMaxUdpDatagram = 65535;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Fd& operator=(Fd&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    ~Fd() { reset(); }
    int get() const noexcept { return fd_; }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

sockaddr_in to_sockaddr(const Endpoint& ep) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1)
        throw NetError(NetErrc::BadEndpoint, "not an IPv4 address: '" + ep.host + "'");
    return addr;
}

Fd make_socket(int type) {
    Fd fd(::socket(AF_INET, type | SOCK_CLOEXEC, 0));
    if (fd.get() < 0) throw NetError(NetErrc::IoError, errno_text("socket"));
    return fd;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left <= 0 ? 0 : static_cast<int>(left);
}

/// Waits for `events` on fd until the deadline. False on timeout.
bool wait_for(int fd, short events, Clock::time_point deadline) {
    for (;;) {
        const int left = remaining_ms(deadline);
        if (left == 0) return false;
        pollfd p{fd, events, 0};
        const int rc = ::poll(&p, 1, left);
        if (rc > 0) return true;
        if (rc == 0) return false;
        if (errno != EINTR) throw NetError(NetErrc::IoError, errno_text("poll"));
    }
}

void send_all(int fd, std::span<const std::uint8_t> data, Clock::time_point deadline) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n > 0) {
            sent += static_cast<std::size_t>(n);
            continue;
        }
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
            if (!wait_for(fd, POLLOUT, deadline)) throw NetError(NetErrc::Timeout, "send timed out");
            continue;
        }
        throw NetError(NetErrc::IoError, errno_text("send"));
    }
}

/// Reads exactly `out.size()` bytes. False on orderly close before the first byte.
bool recv_exact(int fd, std::span<std::uint8_t> out, Clock::time_point deadline) {
    std::size_t got = 0;
    while (got < out.size()) {
        const ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
        if (n > 0) {
            got += static_cast<std::size_t>(n);
            continue;
        }
        if (n == 0) {
            if (got == 0) return false;
            throw NetError(NetErrc::IoError, "connection closed mid-message");
        }
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
            if (!wait_for(fd, POLLIN, deadline)) throw NetError(NetErrc::Timeout, "receive timed out");
            continue;
        }
        throw NetError(NetErrc::IoError, errno_text("recv"));
    }
    return true;
}

void send_framed(int fd, std::span<const std::uint8_t> message, Clock::time_point deadline) {
    if (message.size() > 0xFFFF) throw NetError(NetErrc::IoError, "message too large for TCP framing");
    Bytes framed;
    framed.reserve(message.size() + 2);
    framed.push_back(static_cast<std::uint8_t>(message.size() >> 8));
    framed.push_back(static_cast<std::uint8_t>(message.size()));
    framed.insert(framed.end(), message.begin(), message.end());
    send_all(fd, framed, deadline);
}

std::optional<Bytes> recv_framed(int fd, Clock::time_point deadline) {
    std::uint8_t len[2];
    if (!recv_exact(fd, len, deadline)) return std::nullopt;
    Bytes message(static_cast<std::size_t>((len[0] << 8) | len[1]));
    if (!message.empty() && !recv_exact(fd, message, deadline))
        throw NetError(NetErrc::IoError, "connection closed mid-message");
    return message;
}

std::uint16_t message_id(std::span<const std::uint8_t> wire) {
    return wire.size() < 2 ? 0 : static_cast<std::uint16_t>((wire[0] << 8) | wire[1]);
}

Bytes udp_exchange(const Endpoint& server, std::span<const std::uint8_t> request, Clock::time_point deadline) {
    const sockaddr_in addr = to_sockaddr(server);
    Fd fd = make_socket(SOCK_DGRAM);
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        throw NetError(NetErrc::IoError, errno_text("connect"));
    set_nonblocking(fd.get());
    if (::send(fd.get(), request.data(), request.size(), 0) < 0) throw NetError(NetErrc::IoError, errno_text("send"));
    Bytes buf(kMaxUdpDatagram);
    for (;;) {
        if (!wait_for(fd.get(), POLLIN, deadline))
            throw NetError(NetErrc::Timeout, "no UDP response from " + server.to_string());
        const ssize_t n = ::recv(fd.get(), buf.data(), buf.size(), 0);
        if (n < 0) {
            if (errno == EAGAIN || errno == EINTR) continue;
            // ICMP port unreachable surfaces as ECONNREFUSED; treat it like silence.
            if (errno == ECONNREFUSED) continue;
            throw NetError(NetErrc::IoError, errno_text("recv"));
        }
        if (n >= 2 && message_id(std::span(buf.data(), static_cast<std::size_t>(n))) == message_id(request)) {
            buf.resize(static_cast<std::size_t>(n));
            return buf;
        }
    }
}

Bytes tcp_exchange(const Endpoint& server, std::span<const std::uint8_t> request, Clock::time_point deadline) {
    const sockaddr_in addr = to_sockaddr(server);
    Fd fd = make_socket(SOCK_STREAM);
    set_nonblocking(fd.get());
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        if (errno != EINPROGRESS) throw NetError(NetErrc::IoError, errno_text("connect"));
        if (!wait_for(fd.get(), POLLOUT, deadline))
            throw NetError(NetErrc::Timeout, "TCP connect to " + server.to_string() + " timed out");
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            errno = err;
            throw NetError(NetErrc::IoError, errno_text("connect"));
        }
    }
    send_framed(fd.get(), request, deadline);
    for (;;) {
        auto reply = recv_framed(fd.get(), deadline);
        if (!reply) throw NetError(NetErrc::IoError, "server closed the connection without answering");
        if (message_id(*reply) == message_id(request)) return std::move(*reply);
    }
}

}  // namespace

// --- endpoints and clients ------------------------------------------------------------

Endpoint Endpoint::parse(std::string_view text) {
    Endpoint ep;
    const auto colon = text.rfind(':');
    ep.host = std::string(text.substr(0, colon));
    ep.port = 53;
    if (colon != std::string_view::npos) {
        const auto port_text = text.substr(colon + 1);
        unsigned port = 0;
        auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535)
            throw NetError(NetErrc::BadEndpoint, "bad port in '" + std::string(text) + "'");
        ep.port = static_cast<std::uint16_t>(port);
    }
    in_addr probe{};
    if (::inet_pton(AF_INET, ep.host.c_str(), &probe) != 1)
        throw NetError(NetErrc::BadEndpoint, "not an IPv4 address: '" + ep.host + "'");
    return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

std::string_view to_string(Transport t) noexcept { return t == Transport::Udp ? "udp" : "tcp"; }

Bytes exchange_raw(const Endpoint& server, std::span<const std::uint8_t> request, Transport transport,
                   std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    return transport == Transport::Udp ? udp_exchange(server, request, deadline)
                                       : tcp_exchange(server, request, deadline);
}

DnsMessage exchange(const Endpoint& server, const DnsMessage& query, const ClientOptions& options) {
    const Bytes wire = encode_message(query);
    const auto deadline = Clock::now() + options.timeout;
    auto matches = [&](const DnsMessage& reply) { return reply.header.qr && reply.questions == query.questions; };
    if (!options.tcp_only) {
        DnsMessage reply = decode_message(udp_exchange(server, wire, deadline));
        if (!matches(reply)) throw NetError(NetErrc::IoError, "response does not match the question");
        if (!reply.header.tc || !options.tcp_fallback) return reply;
    }
    DnsMessage reply = decode_message(tcp_exchange(server, wire, deadline));
    if (!matches(reply)) throw NetError(NetErrc::IoError, "response does not match the question");
    return reply;
}

// --- listener ---------------------------------------------------------------------------

struct DnsListener::State {
    Endpoint endpoint;
    RequestHandler handler;
    ListenerOptions options;
    Fd udp;
    Fd tcp;
    std::atomic<bool> stopping{false};
    std::vector<std::thread> workers;

    struct Connection {
        Fd fd;
        std::thread thread;
        std::atomic<bool> done{false};
    };
    std::mutex connections_mutex;
    std::list<Connection> connections;

    void udp_loop();
    void accept_loop();
    void serve_connection(Connection& conn);
    void reap_connections(bool all);
};

void DnsListener::State::udp_loop() {
    Bytes buf(kMaxUdpDatagram);
    while (!stopping.load()) {
        pollfd p{udp.get(), POLLIN, 0};
        if (::poll(&p, 1, kPollSliceMs) <= 0) continue;
        sockaddr_in peer{};
        socklen_t peer_len = sizeof peer;
        const ssize_t n = ::recvfrom(udp.get(), buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&peer), &peer_len);
        if (n < 0) continue;  // another worker took it, or a transient error
        std::optional<Bytes> reply;
        try {
            reply = handler(std::span(buf.data(), static_cast<std::size_t>(n)), Transport::Udp);
        } catch (const std::exception&) {
            continue;
        }
        if (reply) ::sendto(udp.get(), reply->data(), reply->size(), 0, reinterpret_cast<sockaddr*>(&peer), peer_len);
    }
}

void DnsListener::State::serve_connection(Connection& conn) {
    set_nonblocking(conn.fd.get());
    try {
        while (!stopping.load()) {
            // Idle wait in slices so a stop request is noticed promptly.
            const auto idle_deadline = Clock::now() + options.tcp_idle_timeout;
            bool readable = false;
            while (!stopping.load() && Clock::now() < idle_deadline) {
                pollfd p{conn.fd.get(), POLLIN, 0};
                if (::poll(&p, 1, kPollSliceMs) > 0) {
                    readable = true;
                    break;
                }
            }
            if (!readable) break;
            auto request = recv_framed(conn.fd.get(), Clock::now() + options.tcp_idle_timeout);
            if (!request) break;
            auto reply = handler(*request, Transport::Tcp);
            if (reply) send_framed(conn.fd.get(), *reply, Clock::now() + options.tcp_idle_timeout);
        }
    } catch (const std::exception&) {
    }
    ::shutdown(conn.fd.get(), SHUT_RDWR);
    conn.done.store(true);
}

void DnsListener::State::reap_connections(bool all) {
    std::lock_guard lock(connections_mutex);
    for (auto it = connections.begin(); it != connections.end();) {
        if (all) ::shutdown(it->fd.get(), SHUT_RDWR);
        if (all || it->done.load()) {
            if (it->thread.joinable()) it->thread.join();
            it = connections.erase(it);
        } else {
            ++it;
        }
    }
}

void DnsListener::State::accept_loop() {
    while (!stopping.load()) {
        reap_connections(false);
        pollfd p{tcp.get(), POLLIN, 0};
        if (::poll(&p, 1, kPollSliceMs) <= 0) continue;
        const int client = ::accept4(tcp.get(), nullptr, nullptr, SOCK_CLOEXEC);
        if (client < 0) continue;
        std::lock_guard lock(connections_mutex);
        auto& conn = connections.emplace_back();
        conn.fd = Fd(client);
        conn.thread = std::thread([this, &conn] { serve_connection(conn); });
    }
}

DnsListener::DnsListener(std::unique_ptr<State> state) : state_(std::move(state)) {}

DnsListener::~DnsListener() { stop(); }

const Endpoint& DnsListener::endpoint() const noexcept { return state_->endpoint; }

std::unique_ptr<DnsListener> DnsListener::start(const Endpoint& endpoint, RequestHandler handler,
                                                const ListenerOptions& options) {
    auto state = std::make_unique<State>();
    state->handler = std::move(handler);
    state->options = options;
    state->endpoint = endpoint;
    sockaddr_in addr = to_sockaddr(endpoint);

    // An ephemeral UDP port may already be taken for TCP; retry a few times.
    const int attempts = endpoint.port == 0 ? 32 : 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        Fd udp = make_socket(SOCK_DGRAM);
        addr.sin_port = htons(endpoint.port);
        if (::bind(udp.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
            throw NetError(NetErrc::BindFailure, errno_text(("UDP bind " + endpoint.to_string()).c_str()));
        sockaddr_in bound{};
        socklen_t len = sizeof bound;
        ::getsockname(udp.get(), reinterpret_cast<sockaddr*>(&bound), &len);

        Fd tcp = make_socket(SOCK_STREAM);
        const int one = 1;
        ::setsockopt(tcp.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(tcp.get(), reinterpret_cast<const sockaddr*>(&bound), sizeof bound) != 0) {
            if (attempt + 1 < attempts && errno == EADDRINUSE) continue;
            throw NetError(NetErrc::BindFailure, errno_text(("TCP bind " + endpoint.to_string()).c_str()));
        }
        if (::listen(tcp.get(), 64) != 0) throw NetError(NetErrc::BindFailure, errno_text("listen"));
        set_nonblocking(udp.get());
        set_nonblocking(tcp.get());
        state->endpoint.port = ntohs(bound.sin_port);
        state->udp = std::move(udp);
        state->tcp = std::move(tcp);
        break;
    }

    State* s = state.get();
    const unsigned workers = std::max(1u, options.udp_workers);
    for (unsigned i = 0; i < workers; ++i) s->workers.emplace_back([s] { s->udp_loop(); });
    s->workers.emplace_back([s] { s->accept_loop(); });
    return std::unique_ptr<DnsListener>(new DnsListener(std::move(state)));
}

void DnsListener::stop() {
    if (!state_ || state_->stopping.exchange(true)) return;
    for (auto& t : state_->workers)
        if (t.joinable()) t.join();
    state_->reap_connections(true);
    state_->udp.reset();
    state_->tcp.reset();
}

}  // namespace agility
