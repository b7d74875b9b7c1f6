#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "agility/message.hpp"

namespace agility {

/// An IPv4 address and port.
struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// "127.0.0.1:5300" or "127.0.0.1" (port 53). Throws NetError(BadEndpoint).
    static Endpoint parse(std::string_view text);
    std::string to_string() const;
    bool operator==(const Endpoint&) const = default;
};

inline constexpr std::uint16_t kDefaultServerPort = 5300;

enum class Transport { Udp, Tcp };
std::string_view to_string(Transport t) noexcept;

struct ClientOptions {
    std::chrono::milliseconds timeout{2000};
    /// Retry over TCP when a UDP answer comes back truncated.
    bool tcp_fallback = true;
    bool tcp_only = false;
};

/// Sends `query` and waits for the matching response (same id and question).
/// Throws NetError(Timeout | IoError); WireError if the reply does not parse.
DnsMessage exchange(const Endpoint& server, const DnsMessage& query, const ClientOptions& options = {});

/// One request/response over the given transport without interpretation
/// beyond matching the message id. Throws NetError(Timeout | IoError).
Bytes exchange_raw(const Endpoint& server, std::span<const std::uint8_t> request, Transport transport,
                   std::chrono::milliseconds timeout);

/// Produces the wire response for one request, or nothing to stay silent.
using RequestHandler = std::function<std::optional<Bytes>(std::span<const std::uint8_t> request, Transport transport)>;

struct ListenerOptions {
    unsigned udp_workers = 2;
    std::chrono::milliseconds tcp_idle_timeout{5000};
};

/// UDP and TCP on one port, each request handled concurrently. Port 0 picks
/// a free ephemeral port shared by both transports.
class DnsListener {
public:
    /// Throws NetError(BindFailure | BadEndpoint).
    static std::unique_ptr<DnsListener> start(const Endpoint& endpoint, RequestHandler handler,
                                              const ListenerOptions& options = {});
    ~DnsListener();

    DnsListener(const DnsListener&) = delete;
    DnsListener& operator=(const DnsListener&) = delete;

    const Endpoint& endpoint() const noexcept;
    /// Stops accepting, closes sockets and joins all threads. Idempotent.
    void stop();

    struct State;

private:
    explicit DnsListener(std::unique_ptr<State> state);
    std::unique_ptr<State> state_;
};

}  // namespace agility
