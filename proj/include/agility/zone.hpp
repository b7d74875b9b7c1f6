#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agility/dnssec.hpp"
#include "agility/message.hpp"

namespace agility {

struct KeySpec {
    std::uint8_t algorithm = algorithm::RSASHA256;
    KeyRole role = KeyRole::ZSK;
    /// Supplied key material; generated at build time when absent.
    std::optional<KeyPair> key;
};

enum class DsPolicy { FromChildKeys, Explicit, Absent };

struct ChildSpec {
    DnsName apex;
    DsPolicy policy = DsPolicy::FromChildKeys;
    std::vector<Ds> explicit_ds;  // used when policy == Explicit
};

/// Structured zone description. JSON schema:
///
///   {
///     "apex": "victim.test.",
///     "keys": [{"algorithm": 8, "role": "KSK"}, {"algorithm": 8, "role": "ZSK", "private_key": "<base64>"}],
///     "records": [{"owner": "www.victim.test.", "type": "A", "ttl": 300, "data": ["10.0.0.1"]}],
///     "children": [{"apex": "sub.victim.test.", "ds": "from_child_keys" | "absent" | ["<tag> <alg> <type> <hex>"]}]
///   }
struct ZoneConfig {
    DnsName apex;
    std::vector<KeySpec> keys;
    std::vector<ResourceRecord> records;
    std::vector<ChildSpec> children;

    /// Throws ZoneError(InvalidConfig) on schema violations.
    static ZoneConfig from_json(std::string_view text);
    std::string to_json() const;
};

struct ZoneBuildOptions {
    std::uint32_t now = 0;
    /// Seed for generated keys. Empty means system randomness.
    std::string seed;
    unsigned rsa_bits = 2048;
    std::uint32_t inception_offset = 3600;
    std::uint32_t validity = 7 * 86400;
};

struct SignedRrset {
    std::vector<ResourceRecord> records;
    std::vector<ResourceRecord> signatures;  // RRSIG records covering `records`
};

/// An immutable signed zone.
class SignedZone {
public:
    const ZoneConfig& config() const noexcept { return config_; }
    const DnsName& apex() const noexcept { return config_.apex; }
    bool is_signed() const noexcept { return !keys_.empty(); }

    const std::vector<KeyPair>& keys() const noexcept { return keys_; }
    std::vector<KeyPair> keys_with_role(KeyRole role) const;
    /// First ZSK of each distinct algorithm, in key order.
    std::vector<KeyPair> signing_zsks() const;

    const SignedRrset* find(const DnsName& owner, std::uint16_t type) const;
    /// True when `name` owns records or is an empty non-terminal in this zone.
    bool name_exists(const DnsName& name) const;
    const std::map<std::pair<DnsName, std::uint16_t>, SignedRrset>& rrsets() const noexcept { return rrsets_; }

    /// DS records the parent serves for this zone; empty when unsigned or Absent.
    const std::vector<Ds>& ds_published() const noexcept { return ds_published_; }

    std::uint32_t inception() const noexcept { return inception_; }
    std::uint32_t expiration() const noexcept { return expiration_; }

private:
    friend SignedZone build_zone(const ZoneConfig&, const ZoneBuildOptions&, std::span<const SignedZone>);
    friend class ZoneTree;

    ZoneConfig config_;
    std::vector<KeyPair> keys_;
    std::map<std::pair<DnsName, std::uint16_t>, SignedRrset> rrsets_;
    std::vector<Ds> ds_published_;
    std::uint32_t inception_ = 0;
    std::uint32_t expiration_ = 0;
};

/// Signs `config`. Children listed with DsPolicy::FromChildKeys must be
/// present in `children`, already built. A SOA and NS RRset are added at the
/// apex when the config does not supply them.
/// Throws ZoneError(UnsupportedAlgorithm | EmptyZone | InvalidConfig).
SignedZone build_zone(const ZoneConfig& config, const ZoneBuildOptions& options,
                      std::span<const SignedZone> children = {});

/// A set of zones served together; the shallowest apex is the trust anchor.
class ZoneTree {
public:
    ZoneTree() = default;
    explicit ZoneTree(std::vector<SignedZone> zones);

    /// Builds deepest zones first and records each zone's published DS.
    static ZoneTree build(std::vector<ZoneConfig> configs, const ZoneBuildOptions& options);

    /// {"zones": [<ZoneConfig>...]}
    static std::vector<ZoneConfig> configs_from_json(std::string_view text);
    static std::string configs_to_json(std::span<const ZoneConfig> configs);

    const std::vector<SignedZone>& zones() const noexcept { return *zones_; }
    const SignedZone& anchor() const;
    const SignedZone* zone(const DnsName& apex) const;
    /// The deepest zone whose apex is an ancestor of (or equal to) `name`.
    const SignedZone* zone_for(const DnsName& name) const;
    const SignedZone* parent_of(const SignedZone& zone) const;

    /// Trust-anchor DNSKEYs: the KSKs of the anchor zone.
    std::vector<Dnskey> trust_anchors() const;

private:
    std::shared_ptr<const std::vector<SignedZone>> zones_ = std::make_shared<const std::vector<SignedZone>>();
};

/// Authoritative answer for `query`. Total: malformed requests get FORMERR,
/// non-QUERY opcodes NOTIMP, names outside every zone REFUSED.
DnsMessage answer_query(const ZoneTree& tree, const DnsMessage& query);

}  // namespace agility
