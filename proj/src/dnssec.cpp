#include "agility/dnssec.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "agility/errors.hpp"
#include "agility/text.hpp"
#include "crypto.hpp"

namespace agility {

namespace {

void put16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

Bytes dnskey_wire(const Dnskey& key) {
    Bytes out;
    out.reserve(4 + key.public_key.size());
    put16(out, key.flags);
    out.push_back(key.protocol);
    out.push_back(key.algorithm);
    out.insert(out.end(), key.public_key.begin(), key.public_key.end());
    return out;
}

}  // namespace

// --- algorithm registry ---------------------------------------------------------

std::string_view to_string(AlgorithmClass c) noexcept {
    switch (c) {
        case AlgorithmClass::Implemented: return "Implemented";
        case AlgorithmClass::KnownUnimplemented: return "KnownUnimplemented";
        case AlgorithmClass::Unknown: return "Unknown";
    }
    return "?";
}

bool is_registered_algorithm(std::uint8_t alg) noexcept {
    switch (alg) {
        case 1: case 2: case 3: case 5: case 6: case 7: case 8: case 10: case 12:
        case 13: case 14: case 15: case 16: case 17: case 23: case 252: case 253: case 254:
            return true;
        default:
            return false;
    }
}

std::string algorithm_mnemonic(std::uint8_t alg) {
    switch (alg) {
        case 1: return "RSAMD5";
        case 2: return "DH";
        case 3: return "DSA";
        case 5: return "RSASHA1";
        case 6: return "DSA-NSEC3-SHA1";
        case 7: return "RSASHA1-NSEC3-SHA1";
        case 8: return "RSASHA256";
        case 10: return "RSASHA512";
        case 12: return "ECC-GOST";
        case 13: return "ECDSAP256SHA256";
        case 14: return "ECDSAP384SHA384";
        case 15: return "ED25519";
        case 16: return "ED448";
        case 17: return "SM2SM3";
        case 23: return "ECC-GOST12";
        case 252: return "INDIRECT";
        case 253: return "PRIVATEDNS";
        case 254: return "PRIVATEOID";
        default: return "ALG" + std::to_string(alg);
    }
}

AlgorithmSupport::AlgorithmSupport() : algorithms_(signable()) {}

AlgorithmSupport::AlgorithmSupport(std::set<std::uint8_t> algorithms) : algorithms_(std::move(algorithms)) {
    for (const auto alg : algorithms_)
        if (!signable().count(alg))
            throw DnssecError(DnssecErrc::UnsupportedAlgorithm,
                              "algorithm " + std::to_string(alg) + " cannot be validated by this build");
}

AlgorithmSupport AlgorithmSupport::parse(std::string_view list) {
    std::set<std::uint8_t> algs;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        if (comma == std::string_view::npos) comma = list.size();
        std::string_view item = list.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            unsigned value = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
            if (ec != std::errc{} || ptr != item.data() + item.size() || value > 255)
                throw DnssecError(DnssecErrc::UnsupportedAlgorithm, "bad algorithm number '" + std::string(item) + "'");
            algs.insert(static_cast<std::uint8_t>(value));
        }
        start = comma + 1;
    }
    return AlgorithmSupport(std::move(algs));
}

const std::set<std::uint8_t>& AlgorithmSupport::signable() {
    static const std::set<std::uint8_t> algs{algorithm::RSASHA256, algorithm::ECDSAP256SHA256, algorithm::ED25519};
    return algs;
}

AlgorithmClass AlgorithmSupport::classify(std::uint8_t alg) const noexcept {
    if (supports(alg)) return AlgorithmClass::Implemented;
    return is_registered_algorithm(alg) ? AlgorithmClass::KnownUnimplemented : AlgorithmClass::Unknown;
}

std::string AlgorithmSupport::to_string() const {
    std::string out;
    for (const auto alg : algorithms_) {
        if (!out.empty()) out += ',';
        out += std::to_string(alg);
    }
    return out;
}

AlgorithmClass classify_algorithm(std::uint8_t alg, const AlgorithmSupport& support) { return support.classify(alg); }

// --- canonical form, key tags, DS -------------------------------------------------

std::vector<Bytes> canonical_rrset(std::span<const ResourceRecord> rrset, std::optional<std::uint32_t> ttl) {
    if (rrset.empty()) return {};
    const auto& first = rrset.front();
    for (const auto& rr : rrset)
        if (rr.name != first.name || rr.type != first.type || rr.rclass != first.rclass)
            throw DnssecError(DnssecErrc::MixedRrset, "records " + to_text(first) + " and " + to_text(rr) +
                                                          " do not form one RRset");

    std::vector<Bytes> rdatas;
    rdatas.reserve(rrset.size());
    for (const auto& rr : rrset) rdatas.push_back(encode_rdata(rr, true));
    std::sort(rdatas.begin(), rdatas.end());
    rdatas.erase(std::unique(rdatas.begin(), rdatas.end()), rdatas.end());

    Bytes prefix = first.name.canonical_wire();
    put16(prefix, first.type);
    put16(prefix, first.rclass);
    put32(prefix, ttl.value_or(first.ttl));

    std::vector<Bytes> forms;
    forms.reserve(rdatas.size());
    for (const auto& rdata : rdatas) {
        Bytes form = prefix;
        put16(form, static_cast<std::uint16_t>(rdata.size()));
        form.insert(form.end(), rdata.begin(), rdata.end());
        forms.push_back(std::move(form));
    }
    return forms;
}

std::uint16_t key_tag(const Dnskey& key) {
    const Bytes wire = dnskey_wire(key);
    if (key.algorithm == 1) {
        // RSA/MD5 keys use the low-order bytes of the modulus instead of the checksum.
        if (wire.size() < 3) return 0;
        return static_cast<std::uint16_t>((wire[wire.size() - 3] << 8) | wire[wire.size() - 2]);
    }
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < wire.size(); ++i) acc += (i & 1) ? wire[i] : static_cast<std::uint32_t>(wire[i]) << 8;
    acc += (acc >> 16) & 0xFFFF;
    return static_cast<std::uint16_t>(acc & 0xFFFF);
}

Ds make_ds(const DnsName& owner, const Dnskey& key, std::uint8_t digest_type) {
    if (digest_type != kDigestSha256)
        throw DnssecError(DnssecErrc::UnsupportedDigestType, "digest type " + std::to_string(digest_type));
    Bytes input = owner.canonical_wire();
    const Bytes rdata = dnskey_wire(key);
    input.insert(input.end(), rdata.begin(), rdata.end());
    return Ds{key_tag(key), key.algorithm, digest_type, sha256(input)};
}

bool ds_matches_key(const Ds& ds, const DnsName& owner, const Dnskey& key) {
    if (ds.digest_type != kDigestSha256 || ds.algorithm != key.algorithm || ds.key_tag != key_tag(key)) return false;
    return make_ds(owner, key, ds.digest_type).digest == ds.digest;
}

Bytes sha256(std::span<const std::uint8_t> data) {
    Bytes out(EVP_MAX_MD_SIZE);
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
        throw DnssecError(DnssecErrc::CryptoFailure, "SHA-256");
    out.resize(len);
    return out;
}

// --- keys ----------------------------------------------------------------------------

std::string_view to_string(KeyRole role) noexcept { return role == KeyRole::KSK ? "KSK" : "ZSK"; }

RandomBytes seeded_bytes(std::string seed, std::string label) {
    struct Stream {
        Bytes prefix;
        std::uint64_t counter = 0;
        Bytes block;
        std::size_t used = 0;
    };
    auto state = std::make_shared<Stream>();
    state->prefix.assign(seed.begin(), seed.end());
    state->prefix.push_back(0);
    state->prefix.insert(state->prefix.end(), label.begin(), label.end());
    return [state](std::span<std::uint8_t> out) {
        for (auto& byte : out) {
            if (state->used == state->block.size()) {
                Bytes input = state->prefix;
                for (int shift = 56; shift >= 0; shift -= 8)
                    input.push_back(static_cast<std::uint8_t>(state->counter >> shift));
                ++state->counter;
                state->block = sha256(input);
                state->used = 0;
            }
            byte = state->block[state->used++];
        }
    };
}

RandomBytes system_bytes() {
    return [](std::span<std::uint8_t> out) {
        if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
            throw DnssecError(DnssecErrc::CryptoFailure, "RAND_bytes");
    };
}

struct KeyPair::Impl {
    Dnskey dnskey;
    KeyRole role;
    std::uint16_t tag;
    Bytes private_material;
    crypto::PkeyPtr pkey;
};

namespace {

std::shared_ptr<const KeyPair::Impl> make_impl(std::uint8_t alg, KeyRole role, crypto::PkeyPtr pkey, Bytes material) {
    auto impl = std::make_shared<KeyPair::Impl>();
    impl->dnskey.flags = role == KeyRole::KSK ? (Dnskey::kZoneKey | Dnskey::kSecureEntryPoint) : Dnskey::kZoneKey;
    impl->dnskey.protocol = 3;
    impl->dnskey.algorithm = alg;
    impl->dnskey.public_key = crypto::public_key_field(alg, pkey.get());
    impl->role = role;
    impl->tag = key_tag(impl->dnskey);
    impl->private_material = std::move(material);
    impl->pkey = std::move(pkey);
    return impl;
}

void require_signable(std::uint8_t alg) {
    if (!AlgorithmSupport::signable().count(alg))
        throw DnssecError(DnssecErrc::UnsupportedAlgorithm,
                          "no private-key support for algorithm " + std::to_string(alg) + " (" + algorithm_mnemonic(alg) + ")");
}

}  // namespace

KeyPair KeyPair::generate(std::uint8_t alg, KeyRole role, const RandomBytes& random, unsigned rsa_bits) {
    require_signable(alg);
    auto generated = crypto::generate(alg, random, rsa_bits);
    return KeyPair(make_impl(alg, role, std::move(generated.pkey), std::move(generated.private_material)));
}

KeyPair KeyPair::from_private(std::uint8_t alg, KeyRole role, std::span<const std::uint8_t> material) {
    require_signable(alg);
    auto pkey = crypto::load_private(alg, material);
    return KeyPair(make_impl(alg, role, std::move(pkey), Bytes(material.begin(), material.end())));
}

const Dnskey& KeyPair::dnskey() const noexcept { return impl_->dnskey; }
KeyRole KeyPair::role() const noexcept { return impl_->role; }
std::uint16_t KeyPair::key_tag() const noexcept { return impl_->tag; }
const Bytes& KeyPair::private_material() const noexcept { return impl_->private_material; }

Bytes KeyPair::sign(std::span<const std::uint8_t> data) const {
    return crypto::sign(impl_->dnskey.algorithm, impl_->pkey.get(), data);
}

std::string KeyPair::to_json() const {
    nlohmann::ordered_json j;
    j["algorithm"] = impl_->dnskey.algorithm;
    j["role"] = std::string(to_string(impl_->role));
    j["flags"] = impl_->dnskey.flags;
    j["key_tag"] = impl_->tag;
    j["public_key"] = to_base64(impl_->dnskey.public_key);
    j["private_key"] = to_base64(impl_->private_material);
    return j.dump(2);
}

KeyPair KeyPair::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        const auto alg = j.at("algorithm").get<std::uint8_t>();
        const auto role_text = j.at("role").get<std::string>();
        KeyRole role;
        if (role_text == "KSK") role = KeyRole::KSK;
        else if (role_text == "ZSK") role = KeyRole::ZSK;
        else throw DnssecError(DnssecErrc::KeyFormat, "role must be KSK or ZSK");
        const Bytes material = from_base64(j.at("private_key").get<std::string>());
        KeyPair key = from_private(alg, role, material);
        if (j.contains("public_key") && from_base64(j["public_key"].get<std::string>()) != key.dnskey().public_key)
            throw DnssecError(DnssecErrc::KeyFormat, "public key does not match private material");
        if (j.contains("flags") && j["flags"].get<std::uint16_t>() != key.dnskey().flags)
            throw DnssecError(DnssecErrc::KeyFormat, "flags do not match role");
        return key;
    } catch (const nlohmann::json::exception& e) {
        throw DnssecError(DnssecErrc::KeyFormat, e.what());
    } catch (const std::invalid_argument& e) {
        throw DnssecError(DnssecErrc::KeyFormat, e.what());
    }
}

// --- signatures ------------------------------------------------------------------

Rrsig signature_meta(const ResourceRecord& sample, const Dnskey& key, const DnsName& signer, std::uint32_t inception,
                     std::uint32_t expiration) {
    Rrsig meta;
    meta.type_covered = sample.type;
    meta.algorithm = key.algorithm;
    meta.labels = static_cast<std::uint8_t>(sample.name.label_count());
    meta.original_ttl = sample.ttl;
    meta.inception = inception;
    meta.expiration = expiration;
    meta.key_tag = key_tag(key);
    meta.signer_name = signer;
    return meta;
}

Bytes signing_input(std::span<const ResourceRecord> rrset, const Rrsig& meta) {
    Rrsig prefix = meta;
    prefix.signature.clear();
    const DnsName owner = rrset.empty() ? meta.signer_name : rrset.front().name;
    Bytes input = encode_rdata(ResourceRecord::make(owner, meta.original_ttl, prefix), true);
    for (const auto& form : canonical_rrset(rrset, meta.original_ttl)) input.insert(input.end(), form.begin(), form.end());
    return input;
}

Rrsig sign_rrset(std::span<const ResourceRecord> rrset, const Rrsig& meta, const KeyPair& key) {
    require_signable(key.dnskey().algorithm);
    if (rrset.empty()) throw DnssecError(DnssecErrc::MixedRrset, "cannot sign an empty RRset");
    auto mismatch = [](const std::string& what) { throw DnssecError(DnssecErrc::MetaMismatch, what); };
    if (meta.algorithm != key.dnskey().algorithm) mismatch("meta algorithm differs from key algorithm");
    if (meta.key_tag != key.key_tag()) mismatch("meta key tag differs from key tag");
    if (meta.type_covered != rrset.front().type) mismatch("meta type covered differs from RRset type");
    if (meta.labels != rrset.front().name.label_count()) mismatch("meta labels differ from owner label count");
    if (!rrset.front().name.is_subdomain_of(meta.signer_name)) mismatch("owner is outside the signer's zone");
    if (meta.inception > meta.expiration) mismatch("inception after expiration");

    Rrsig sig = meta;
    sig.signature = key.sign(signing_input(rrset, meta));
    return sig;
}

std::string_view to_string(VerifyOutcome v) noexcept {
    switch (v) {
        case VerifyOutcome::Valid: return "Valid";
        case VerifyOutcome::InvalidSignature: return "InvalidSignature";
        case VerifyOutcome::OutsideValidity: return "OutsideValidity";
        case VerifyOutcome::AlgorithmUnsupported: return "AlgorithmUnsupported";
        case VerifyOutcome::AlgorithmUnknown: return "AlgorithmUnknown";
        case VerifyOutcome::KeyMismatch: return "KeyMismatch";
    }
    return "?";
}

VerifyOutcome verify_rrsig(std::span<const ResourceRecord> rrset, const Rrsig& sig, const Dnskey& key, std::uint32_t now,
                           const AlgorithmSupport& support) {
    switch (support.classify(sig.algorithm)) {
        case AlgorithmClass::Unknown: return VerifyOutcome::AlgorithmUnknown;
        case AlgorithmClass::KnownUnimplemented: return VerifyOutcome::AlgorithmUnsupported;
        case AlgorithmClass::Implemented: break;
    }
    if (key.algorithm != sig.algorithm || key.protocol != 3 || !key.is_zone_key() || key_tag(key) != sig.key_tag)
        return VerifyOutcome::KeyMismatch;
    if (now < sig.inception || now > sig.expiration) return VerifyOutcome::OutsideValidity;
    if (rrset.empty()) return VerifyOutcome::InvalidSignature;
    const auto& owner = rrset.front().name;
    if (sig.type_covered != rrset.front().type || sig.labels != owner.label_count() ||
        !owner.is_subdomain_of(sig.signer_name) || sig.signature.empty())
        return VerifyOutcome::InvalidSignature;
    Bytes input;
    try {
        input = signing_input(rrset, sig);
    } catch (const DnssecError&) {
        return VerifyOutcome::InvalidSignature;
    } catch (const WireError&) {
        return VerifyOutcome::InvalidSignature;
    }
    return crypto::verify(sig.algorithm, key.public_key, input, sig.signature) ? VerifyOutcome::Valid
                                                                               : VerifyOutcome::InvalidSignature;
}

}  // namespace agility
