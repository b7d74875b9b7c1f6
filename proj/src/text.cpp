#include "agility/text.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <ctime>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace agility {

namespace {

std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

template <typename T>
T parse_uint(std::string_view s, const char* what) {
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument(std::string("bad ") + what + ": '" + std::string(s) + "'");
    return value;
}

std::string strip_ws(std::string_view text) {
    std::string out;
    for (const char c : text)
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(c);
    return out;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (const auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

Bytes from_hex(std::string_view text) {
    const std::string s = strip_ws(text);
    if (s.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("non-hex character");
    };
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
    return out;
}

std::string to_base64(std::span<const std::uint8_t> data) {
    if (data.empty()) return {};
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes from_base64(std::string_view text) {
    const std::string s = strip_ws(text);
    if (s.empty()) return {};
    if (s.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
    Bytes out(3 * s.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(s.data()), static_cast<int>(s.size()));
    if (n < 0) throw std::invalid_argument("malformed base64");
    std::size_t padding = 0;
    if (s.back() == '=') ++padding;
    if (s.size() >= 2 && s[s.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::string format_ipv4(const std::array<std::uint8_t, 4>& a) {
    return std::to_string(a[0]) + "." + std::to_string(a[1]) + "." + std::to_string(a[2]) + "." + std::to_string(a[3]);
}

std::array<std::uint8_t, 4> parse_ipv4(std::string_view text) {
    std::array<std::uint8_t, 4> out{};
    std::size_t start = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t dot = (i < 3) ? text.find('.', start) : text.size();
        if (dot == std::string_view::npos) throw std::invalid_argument("bad IPv4 address: '" + std::string(text) + "'");
        const auto octet = parse_uint<unsigned>(text.substr(start, dot - start), "IPv4 octet");
        if (octet > 255) throw std::invalid_argument("IPv4 octet above 255");
        out[i] = static_cast<std::uint8_t>(octet);
        start = dot + 1;
    }
    return out;
}

std::string format_rrsig_time(std::uint32_t epoch) {
    const std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d%H%M%S", &tm);
    return buf;
}

std::string rdata_to_text(const ResourceRecord& rr) {
    struct Visitor {
        std::string operator()(const ARdata& a) const { return format_ipv4(a.address); }
        std::string operator()(const NsRdata& ns) const { return ns.host.to_string(); }
        std::string operator()(const SoaRdata& s) const {
            return s.mname.to_string() + " " + s.rname.to_string() + " " + std::to_string(s.serial) + " " +
                   std::to_string(s.refresh) + " " + std::to_string(s.retry) + " " + std::to_string(s.expire) +
                   " " + std::to_string(s.minimum);
        }
        std::string operator()(const DnskeyRdata& k) const {
            return std::to_string(k.flags) + " " + std::to_string(k.protocol) + " " + std::to_string(k.algorithm) +
                   " " + to_base64(k.public_key);
        }
        std::string operator()(const DsRdata& ds) const {
            return std::to_string(ds.key_tag) + " " + std::to_string(ds.algorithm) + " " +
                   std::to_string(ds.digest_type) + " " + to_hex(ds.digest);
        }
        std::string operator()(const RrsigRdata& sig) const {
            return type_to_string(sig.type_covered) + " " + std::to_string(sig.algorithm) + " " +
                   std::to_string(sig.labels) + " " + std::to_string(sig.original_ttl) + " " +
                   format_rrsig_time(sig.expiration) + " " + format_rrsig_time(sig.inception) + " " +
                   std::to_string(sig.key_tag) + " " + sig.signer_name.to_string() + " " + to_base64(sig.signature);
        }
        std::string operator()(const OpaqueRdata& o) const {
            return "\\# " + std::to_string(o.data.size()) + (o.data.empty() ? "" : " " + to_hex(o.data));
        }
    };
    return std::visit(Visitor{}, rr.rdata);
}

std::string to_text(const ResourceRecord& rr) {
    std::string cls = rr.rclass == rrclass::IN ? "IN" : "CLASS" + std::to_string(rr.rclass);
    return rr.name.to_string() + " " + std::to_string(rr.ttl) + " " + cls + " " + type_to_string(rr.type) + " " +
           rdata_to_text(rr);
}

std::string to_text(const DnsMessage& msg) {
    std::ostringstream out;
    const auto& h = msg.header;
    out << ";; id " << h.id << " rcode " << rcode_to_string(h.rcode) << " flags";
    if (h.qr) out << " qr";
    if (h.aa) out << " aa";
    if (h.tc) out << " tc";
    if (h.rd) out << " rd";
    if (h.ra) out << " ra";
    if (h.ad) out << " ad";
    if (h.cd) out << " cd";
    if (msg.edns) out << " ; edns udp=" << msg.edns->udp_payload_size << (msg.edns->dnssec_ok ? " do" : "");
    out << "\n";
    for (const auto& q : msg.questions) out << ";" << q.name.to_string() << " IN " << type_to_string(q.type) << "\n";
    const std::pair<const char*, const std::vector<ResourceRecord>*> sections[] = {
        {"ANSWER", &msg.answers}, {"AUTHORITY", &msg.authority}, {"ADDITIONAL", &msg.additional}};
    for (const auto& [label, records] : sections) {
        if (records->empty()) continue;
        out << ";; " << label << "\n";
        for (const auto& rr : *records) out << to_text(rr) << "\n";
    }
    return out.str();
}

Rdata parse_rdata(std::uint16_t type, std::string_view text) {
    const auto tokens = split_ws(text);
    if (!tokens.empty() && tokens[0] == "\\#") {
        if (tokens.size() < 2) throw std::invalid_argument("generic rdata needs a length");
        const auto length = parse_uint<std::size_t>(tokens[1], "generic rdata length");
        std::string hex;
        for (std::size_t i = 2; i < tokens.size(); ++i) hex += tokens[i];
        Bytes data = from_hex(hex);
        if (data.size() != length) throw std::invalid_argument("generic rdata length mismatch");
        return decode_rdata(type, data);
    }
    auto expect = [&](std::size_t n, const char* what) {
        if (tokens.size() < n) throw std::invalid_argument(std::string("too few fields for ") + what);
    };
    switch (type) {
        case rrtype::A:
            expect(1, "A");
            return ARdata{parse_ipv4(tokens[0])};
        case rrtype::NS:
            expect(1, "NS");
            return NsRdata{DnsName::parse(tokens[0])};
        case rrtype::SOA: {
            expect(7, "SOA");
            SoaRdata soa;
            soa.mname = DnsName::parse(tokens[0]);
            soa.rname = DnsName::parse(tokens[1]);
            soa.serial = parse_uint<std::uint32_t>(tokens[2], "SOA serial");
            soa.refresh = parse_uint<std::uint32_t>(tokens[3], "SOA refresh");
            soa.retry = parse_uint<std::uint32_t>(tokens[4], "SOA retry");
            soa.expire = parse_uint<std::uint32_t>(tokens[5], "SOA expire");
            soa.minimum = parse_uint<std::uint32_t>(tokens[6], "SOA minimum");
            return soa;
        }
        case rrtype::DS: {
            expect(4, "DS");
            DsRdata ds;
            ds.key_tag = parse_uint<std::uint16_t>(tokens[0], "DS key tag");
            ds.algorithm = parse_uint<std::uint8_t>(tokens[1], "DS algorithm");
            ds.digest_type = parse_uint<std::uint8_t>(tokens[2], "DS digest type");
            std::string hex;
            for (std::size_t i = 3; i < tokens.size(); ++i) hex += tokens[i];
            ds.digest = from_hex(hex);
            return ds;
        }
        case rrtype::DNSKEY: {
            expect(4, "DNSKEY");
            DnskeyRdata key;
            key.flags = parse_uint<std::uint16_t>(tokens[0], "DNSKEY flags");
            key.protocol = parse_uint<std::uint8_t>(tokens[1], "DNSKEY protocol");
            key.algorithm = parse_uint<std::uint8_t>(tokens[2], "DNSKEY algorithm");
            std::string b64;
            for (std::size_t i = 3; i < tokens.size(); ++i) b64 += tokens[i];
            key.public_key = from_base64(b64);
            return key;
        }
        default:
            throw std::invalid_argument("no presentation parser for " + type_to_string(type) + "; use \\# form");
    }
}

}  // namespace agility
