#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace agility {

using Bytes = std::vector<std::uint8_t>;

/// A domain name held as a list of raw labels, most specific first.
///
/// Spelling is preserved exactly as constructed or decoded. Equality, hashing
/// and ordering ignore ASCII case; ordering is the DNSSEC canonical order
/// (labels compared right to left as lowercased byte strings).
class DnsName {
public:
    static constexpr std::size_t kMaxLabelLength = 63;
    static constexpr std::size_t kMaxWireLength = 255;

    DnsName() = default;  // the root
    explicit DnsName(std::vector<std::string> labels);

    /// Parses presentation form ("www.Example.test." or without the final dot).
    /// Supports `\.`, `\\` and `\DDD` escapes. Throws WireError(InvalidName).
    static DnsName parse(std::string_view text);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t label_count() const noexcept { return labels_.size(); }
    bool is_root() const noexcept { return labels_.empty(); }
    std::size_t wire_length() const noexcept;

    std::string to_string() const;
    DnsName lowercased() const;
    DnsName parent() const;
    DnsName prepend(std::string_view label) const;

    /// True when `ancestor` equals this name or is one of its ancestors.
    bool is_subdomain_of(const DnsName& ancestor) const;

    /// Uncompressed wire form, case preserved.
    Bytes to_wire() const;
    /// Uncompressed wire form, lowercased.
    Bytes canonical_wire() const;

    bool same_spelling(const DnsName& other) const noexcept { return labels_ == other.labels_; }

    friend bool operator==(const DnsName& a, const DnsName& b) noexcept;
    friend std::strong_ordering operator<=>(const DnsName& a, const DnsName& b) noexcept;

private:
    std::vector<std::string> labels_;
};

struct DnsNameHash {
    std::size_t operator()(const DnsName& name) const noexcept;
};

char ascii_lower(char c) noexcept;

}  // namespace agility
