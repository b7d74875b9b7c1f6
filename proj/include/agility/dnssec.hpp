#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agility/message.hpp"

namespace agility {

using Dnskey = DnskeyRdata;
using Ds = DsRdata;
using Rrsig = RrsigRdata;

namespace algorithm {
inline constexpr std::uint8_t RSASHA1 = 5;
inline constexpr std::uint8_t RSASHA256 = 8;
inline constexpr std::uint8_t ECDSAP256SHA256 = 13;
inline constexpr std::uint8_t ECDSAP384SHA384 = 14;
inline constexpr std::uint8_t ED25519 = 15;
inline constexpr std::uint8_t ED448 = 16;
}  // namespace algorithm

/// Unassigned in the IANA registry; the default target of algorithm rewrites.
inline constexpr std::uint8_t kDefaultUnknownAlgorithm = 100;
inline constexpr std::uint8_t kDigestSha256 = 2;

enum class AlgorithmClass { Implemented, KnownUnimplemented, Unknown };
std::string_view to_string(AlgorithmClass c) noexcept;

bool is_registered_algorithm(std::uint8_t alg) noexcept;
std::string algorithm_mnemonic(std::uint8_t alg);

/// The set of algorithms a signer or validator treats as Implemented.
class AlgorithmSupport {
public:
    /// {8, 13, 15}.
    AlgorithmSupport();
    /// Throws DnssecError(UnsupportedAlgorithm) for algorithms outside signable().
    explicit AlgorithmSupport(std::set<std::uint8_t> algorithms);
    /// Parses "8,13,15".
    static AlgorithmSupport parse(std::string_view list);

    /// Everything this build can sign and verify.
    static const std::set<std::uint8_t>& signable();

    AlgorithmClass classify(std::uint8_t alg) const noexcept;
    bool supports(std::uint8_t alg) const noexcept { return algorithms_.count(alg) != 0; }
    bool supports_digest(std::uint8_t digest_type) const noexcept { return digest_type == kDigestSha256; }
    const std::set<std::uint8_t>& algorithms() const noexcept { return algorithms_; }
    std::string to_string() const;

    bool operator==(const AlgorithmSupport&) const = default;

private:
    std::set<std::uint8_t> algorithms_;
};

AlgorithmClass classify_algorithm(std::uint8_t alg, const AlgorithmSupport& support = AlgorithmSupport{});

/// Canonical wire forms of an RRset, sorted by rdata and deduplicated.
/// All records take `ttl` when given, otherwise the first record's TTL.
/// Throws DnssecError(MixedRrset) when owner, type or class differ.
std::vector<Bytes> canonical_rrset(std::span<const ResourceRecord> rrset, std::optional<std::uint32_t> ttl = {});

std::uint16_t key_tag(const Dnskey& key);

/// Throws DnssecError(UnsupportedDigestType) for anything but SHA-256.
Ds make_ds(const DnsName& owner, const Dnskey& key, std::uint8_t digest_type = kDigestSha256);

/// True when `ds` refers to `key` at `owner` by tag, algorithm and digest.
bool ds_matches_key(const Ds& ds, const DnsName& owner, const Dnskey& key);

enum class KeyRole { KSK, ZSK };
std::string_view to_string(KeyRole role) noexcept;

/// Fills the span with bytes. Used for key generation.
using RandomBytes = std::function<void(std::span<std::uint8_t>)>;

/// Deterministic stream: SHA-256(seed || 0x00 || label || counter) blocks.
RandomBytes seeded_bytes(std::string seed, std::string label);
RandomBytes system_bytes();

/// A DNSKEY with its private half. Immutable; copies share the loaded key.
class KeyPair {
public:
    /// Throws DnssecError(UnsupportedAlgorithm) unless `algorithm` is in
    /// AlgorithmSupport::signable().
    static KeyPair generate(std::uint8_t algorithm, KeyRole role, const RandomBytes& random,
                            unsigned rsa_bits = 2048);

    /// Private material: PKCS#1 DER for RSA, the 32-byte scalar for P-256,
    /// the 32-byte seed for Ed25519.
    static KeyPair from_private(std::uint8_t algorithm, KeyRole role, std::span<const std::uint8_t> material);

    const Dnskey& dnskey() const noexcept;
    KeyRole role() const noexcept;
    std::uint16_t key_tag() const noexcept;
    const Bytes& private_material() const noexcept;

    /// Raw DNSSEC-format signature over `data`.
    Bytes sign(std::span<const std::uint8_t> data) const;

    /// Structured text form: {"algorithm", "role", "flags", "public_key", "private_key"}.
    std::string to_json() const;
    static KeyPair from_json(std::string_view text);

    struct Impl;

private:
    explicit KeyPair(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Builds RRSIG fields (sans signature) for signing `rrset` with `key`.
Rrsig signature_meta(const ResourceRecord& sample, const Dnskey& key, const DnsName& signer,
                     std::uint32_t inception, std::uint32_t expiration);

/// Signing input: RRSIG rdata without signature followed by the canonical RRset.
Bytes signing_input(std::span<const ResourceRecord> rrset, const Rrsig& meta);

/// Throws DnssecError(UnsupportedAlgorithm | MetaMismatch | MixedRrset).
Rrsig sign_rrset(std::span<const ResourceRecord> rrset, const Rrsig& meta, const KeyPair& key);

enum class VerifyOutcome {
    Valid,
    InvalidSignature,
    OutsideValidity,
    AlgorithmUnsupported,
    AlgorithmUnknown,
    KeyMismatch,
};
std::string_view to_string(VerifyOutcome v) noexcept;

/// Total: every failure is an outcome. No cryptography is attempted unless
/// the RRSIG algorithm is Implemented under `support`.
VerifyOutcome verify_rrsig(std::span<const ResourceRecord> rrset, const Rrsig& sig, const Dnskey& key,
                           std::uint32_t now, const AlgorithmSupport& support = AlgorithmSupport{});

Bytes sha256(std::span<const std::uint8_t> data);

}  // namespace agility
