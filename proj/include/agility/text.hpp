#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "agility/message.hpp"

namespace agility {

std::string to_hex(std::span<const std::uint8_t> data);
/// Throws std::invalid_argument on odd length or non-hex characters. Whitespace is skipped.
Bytes from_hex(std::string_view text);

std::string to_base64(std::span<const std::uint8_t> data);
/// Throws std::invalid_argument on malformed input. Whitespace is skipped.
Bytes from_base64(std::string_view text);

std::string format_ipv4(const std::array<std::uint8_t, 4>& address);
std::array<std::uint8_t, 4> parse_ipv4(std::string_view text);

/// Renders an epoch time as YYYYMMDDHHMMSS (UTC), the RRSIG presentation form.
std::string format_rrsig_time(std::uint32_t epoch);

/// Presentation form of the rdata alone ("257 3 8 AwEAA...").
std::string rdata_to_text(const ResourceRecord& rr);
/// "owner ttl IN TYPE rdata".
std::string to_text(const ResourceRecord& rr);
std::string to_text(const DnsMessage& msg);

/// Parses presentation rdata for A, NS, SOA, DS and DNSKEY, plus the generic
/// "\# <len> <hex>" form for any type. Throws std::invalid_argument.
Rdata parse_rdata(std::uint16_t type, std::string_view text);

}  // namespace agility
