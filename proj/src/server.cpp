#include "agility/server.hpp"

#include "agility/errors.hpp"

namespace agility {

namespace {

std::optional<Bytes> format_error(std::span<const std::uint8_t> request) {
    if (request.size() < 12) return std::nullopt;
    // Echo the id and opcode; never answer something that claims to be a response.
    if (request[2] & 0x80) return std::nullopt;
    DnsMessage reply;
    reply.header.id = static_cast<std::uint16_t>((request[0] << 8) | request[1]);
    reply.header.qr = true;
    reply.header.opcode = static_cast<std::uint8_t>((request[2] >> 3) & 0x0F);
    reply.header.rcode = rcode::FormErr;
    return encode_message(reply);
}

}  // namespace

RequestHandler authority_handler(ZoneTree tree) {
    return [tree = std::move(tree)](std::span<const std::uint8_t> request, Transport transport) -> std::optional<Bytes> {
        DnsMessage query;
        try {
            query = decode_message(request);
        } catch (const WireError&) {
            return format_error(request);
        }
        if (query.header.qr) return std::nullopt;
        const DnsMessage response = answer_query(tree, query);
        EncodeOptions options;
        if (transport == Transport::Udp) {
            options.max_size = udp_limit_for(query);
            options.allow_truncation = true;
        }
        return encode_message(response, options);
    };
}

std::unique_ptr<DnsListener> serve(const Endpoint& endpoint, ZoneTree tree, const ListenerOptions& options) {
    return DnsListener::start(endpoint, authority_handler(std::move(tree)), options);
}

}  // namespace agility
