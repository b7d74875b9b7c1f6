#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agility/name.hpp"

namespace agility {

namespace rrtype {
inline constexpr std::uint16_t A = 1;
inline constexpr std::uint16_t NS = 2;
inline constexpr std::uint16_t SOA = 6;
inline constexpr std::uint16_t MX = 15;
inline constexpr std::uint16_t TXT = 16;
inline constexpr std::uint16_t OPT = 41;
inline constexpr std::uint16_t DS = 43;
inline constexpr std::uint16_t RRSIG = 46;
inline constexpr std::uint16_t DNSKEY = 48;
}  // namespace rrtype

namespace rrclass {
inline constexpr std::uint16_t IN = 1;
}

namespace rcode {
inline constexpr std::uint8_t NoError = 0;
inline constexpr std::uint8_t FormErr = 1;
inline constexpr std::uint8_t ServFail = 2;
inline constexpr std::uint8_t NxDomain = 3;
inline constexpr std::uint8_t NotImp = 4;
inline constexpr std::uint8_t Refused = 5;
}  // namespace rcode

std::string type_to_string(std::uint16_t type);
/// Accepts mnemonics ("DNSKEY") and the generic "TYPE123" form.
std::optional<std::uint16_t> type_from_string(std::string_view text);
std::string rcode_to_string(std::uint8_t code);

struct ARdata {
    std::array<std::uint8_t, 4> address{};
    bool operator==(const ARdata&) const = default;
};

struct NsRdata {
    DnsName host;
    bool operator==(const NsRdata&) const = default;
};

struct SoaRdata {
    DnsName mname;
    DnsName rname;
    std::uint32_t serial = 0;
    std::uint32_t refresh = 0;
    std::uint32_t retry = 0;
    std::uint32_t expire = 0;
    std::uint32_t minimum = 0;
    bool operator==(const SoaRdata&) const = default;
};

struct DnskeyRdata {
    static constexpr std::uint16_t kZoneKey = 0x0100;
    static constexpr std::uint16_t kSecureEntryPoint = 0x0001;

    std::uint16_t flags = kZoneKey;
    std::uint8_t protocol = 3;
    std::uint8_t algorithm = 0;
    Bytes public_key;

    bool is_zone_key() const noexcept { return (flags & kZoneKey) != 0; }
    bool is_sep() const noexcept { return (flags & kSecureEntryPoint) != 0; }
    bool operator==(const DnskeyRdata&) const = default;
};

struct DsRdata {
    std::uint16_t key_tag = 0;
    std::uint8_t algorithm = 0;
    std::uint8_t digest_type = 0;
    Bytes digest;
    bool operator==(const DsRdata&) const = default;
};

struct RrsigRdata {
    std::uint16_t type_covered = 0;
    std::uint8_t algorithm = 0;
    std::uint8_t labels = 0;
    std::uint32_t original_ttl = 0;
    std::uint32_t expiration = 0;
    std::uint32_t inception = 0;
    std::uint16_t key_tag = 0;
    DnsName signer_name;
    Bytes signature;
    bool operator==(const RrsigRdata&) const = default;
};

struct OpaqueRdata {
    Bytes data;
    bool operator==(const OpaqueRdata&) const = default;
};

using Rdata = std::variant<ARdata, NsRdata, SoaRdata, DnskeyRdata, DsRdata, RrsigRdata, OpaqueRdata>;

/// The rrtype a typed rdata alternative belongs to; nullopt for OpaqueRdata.
std::optional<std::uint16_t> rdata_type(const Rdata& rdata) noexcept;

struct ResourceRecord {
    DnsName name;
    std::uint16_t type = 0;
    std::uint16_t rclass = rrclass::IN;
    std::uint32_t ttl = 0;
    Rdata rdata = OpaqueRdata{};

    /// Builds a record whose type is taken from the typed rdata.
    static ResourceRecord make(DnsName name, std::uint32_t ttl, Rdata rdata);
    static ResourceRecord opaque(DnsName name, std::uint16_t type, std::uint32_t ttl, Bytes data);

    template <typename T>
    const T* as() const noexcept {
        return std::get_if<T>(&rdata);
    }
    template <typename T>
    T* as() noexcept {
        return std::get_if<T>(&rdata);
    }

    bool operator==(const ResourceRecord&) const = default;
};

struct Question {
    DnsName name;
    std::uint16_t type = rrtype::A;
    std::uint16_t qclass = rrclass::IN;
    bool operator==(const Question&) const = default;
};

struct Header {
    std::uint16_t id = 0;
    bool qr = false;
    std::uint8_t opcode = 0;
    bool aa = false;
    bool tc = false;
    bool rd = false;
    bool ra = false;
    bool z = false;
    bool ad = false;
    bool cd = false;
    std::uint8_t rcode = 0;  // low four bits; the high bits live in Edns
    bool operator==(const Header&) const = default;
};

/// EDNS0 parameters carried by the single OPT pseudo-record.
struct Edns {
    static constexpr std::uint16_t kDoBit = 0x8000;

    std::uint16_t udp_payload_size = 1232;
    std::uint8_t extended_rcode = 0;
    std::uint8_t version = 0;
    bool dnssec_ok = false;
    std::uint16_t other_flags = 0;  // the 15 flag bits after DO
    Bytes options;                  // raw option TLVs
    bool operator==(const Edns&) const = default;
};

enum class Section { Answer, Authority, Additional };

struct DnsMessage {
    Header header;
    std::vector<Question> questions;
    std::vector<ResourceRecord> answers;
    std::vector<ResourceRecord> authority;
    std::vector<ResourceRecord> additional;  // never holds OPT; see edns
    std::optional<Edns> edns;

    std::vector<ResourceRecord>& section(Section s);
    const std::vector<ResourceRecord>& section(Section s) const;
    bool dnssec_ok() const noexcept { return edns && edns->dnssec_ok; }

    bool operator==(const DnsMessage&) const = default;
};

/// A query with one question. DO is set when `dnssec_ok`.
DnsMessage make_query(std::uint16_t id, const DnsName& name, std::uint16_t type, bool dnssec_ok,
                      bool recursion_desired = false);

struct EncodeOptions {
    std::size_t max_size = 65535;
    /// When the message does not fit: true emits a TC=1 message holding only
    /// the header, questions and OPT; false throws MessageTooLarge.
    bool allow_truncation = false;
};

Bytes encode_message(const DnsMessage& msg, const EncodeOptions& options = {});
DnsMessage decode_message(std::span<const std::uint8_t> wire);

/// Uncompressed rdata wire form. With `canonical` set, embedded names of the
/// types that carry them (NS, SOA, RRSIG signer) are lowercased.
Bytes encode_rdata(const ResourceRecord& rr, bool canonical = false);
/// Decodes rdata that stands alone (no compression context).
Rdata decode_rdata(std::uint16_t type, std::span<const std::uint8_t> rdata);

/// The largest message a requester accepts over UDP.
std::size_t udp_limit_for(const DnsMessage& query) noexcept;

}  // namespace agility
