#include <gtest/gtest.h>

#include <algorithm>

#include "agility/dnssec.hpp"
#include "agility/errors.hpp"
#include "agility/text.hpp"
#include "oracle_values.hpp"
#include "random_message.hpp"

using namespace agility;

namespace {

Dnskey parse_key(std::string_view text) { return std::get<Dnskey>(parse_rdata(rrtype::DNSKEY, text)); }

std::vector<ResourceRecord> fixture_rrset() {
    const auto owner = DnsName::parse(oracle::kFixtureOwner);
    return {ResourceRecord::make(owner, oracle::kFixtureTtl, ARdata{{10, 0, 0, 2}}),
            ResourceRecord::make(owner, oracle::kFixtureTtl, ARdata{{10, 0, 0, 1}})};
}

Rrsig fixture_meta(const KeyPair& key) {
    return signature_meta(fixture_rrset().front(), key.dnskey(), DnsName::parse(oracle::kFixtureSigner),
                          oracle::kFixtureInception, oracle::kFixtureExpiration);
}

KeyPair fixture_key(std::uint8_t alg) {
    switch (alg) {
        case 8: return KeyPair::from_private(8, KeyRole::KSK, from_base64(oracle::kRsaPrivateDer));
        case 13: return KeyPair::from_private(13, KeyRole::KSK, from_base64(oracle::kEcPrivate));
        default: return KeyPair::from_private(15, KeyRole::KSK, from_base64(oracle::kEd25519Private));
    }
}

constexpr std::uint32_t kInside = oracle::kFixtureInception + 10;

}  // namespace

TEST(Algorithms, ClassificationUnderDefaultAndReducedProfiles) {
    EXPECT_EQ(classify_algorithm(8), AlgorithmClass::Implemented);
    EXPECT_EQ(classify_algorithm(13), AlgorithmClass::Implemented);
    EXPECT_EQ(classify_algorithm(15), AlgorithmClass::Implemented);
    EXPECT_EQ(classify_algorithm(16), AlgorithmClass::KnownUnimplemented);
    EXPECT_EQ(classify_algorithm(5), AlgorithmClass::KnownUnimplemented);
    EXPECT_EQ(classify_algorithm(100), AlgorithmClass::Unknown);
    const auto reduced = AlgorithmSupport::parse("8, 13");
    EXPECT_EQ(reduced.classify(15), AlgorithmClass::KnownUnimplemented);
    EXPECT_EQ(reduced.to_string(), "8,13");
    EXPECT_THROW(AlgorithmSupport::parse("8,16"), DnssecError);
    EXPECT_THROW(AlgorithmSupport::parse("8,x"), DnssecError);
}

TEST(CanonicalRrset, SortsLowercasesAndDedupes) {
    const auto owner = DnsName::parse("ExAmPle.TEST.");
    std::vector<ResourceRecord> rrset = {ResourceRecord::make(owner, 60, ARdata{{10, 0, 0, 2}}),
                                         ResourceRecord::make(owner, 60, ARdata{{10, 0, 0, 1}}),
                                         ResourceRecord::make(owner, 60, ARdata{{10, 0, 0, 2}})};
    const auto forms = canonical_rrset(rrset);
    ASSERT_EQ(forms.size(), 2u);
    const Bytes lower = DnsName::parse("example.test.").to_wire();
    EXPECT_TRUE(std::equal(lower.begin(), lower.end(), forms[0].begin()));
    EXPECT_EQ(forms[0].back(), 1);
    EXPECT_EQ(forms[1].back(), 2);

    std::reverse(rrset.begin(), rrset.end());
    EXPECT_EQ(canonical_rrset(rrset), forms);

    rrset.push_back(ResourceRecord::make(DnsName::parse("other.test."), 60, ARdata{{1, 1, 1, 1}}));
    try {
        canonical_rrset(rrset);
        FAIL();
    } catch (const DnssecError& e) {
        EXPECT_EQ(e.code(), DnssecErrc::MixedRrset);
    }
}

TEST(CanonicalRrset, SortsByRdataNotLength) {
    const auto owner = DnsName::parse("t.");
    std::vector<ResourceRecord> rrset = {ResourceRecord::opaque(owner, 65280, 1, {0x01, 0x00}),
                                         ResourceRecord::opaque(owner, 65280, 1, {0x02})};
    const auto forms = canonical_rrset(rrset);
    EXPECT_EQ(forms[0].back(), 0x00);
    EXPECT_EQ(forms[1].back(), 0x02);
}

TEST(KeyTag, WorkedExamples) {
    EXPECT_EQ(key_tag(parse_key(oracle::kRfcDnskey)), oracle::kRfcKeyTag);
    EXPECT_EQ(key_tag(parse_key(oracle::kEdDnskey)), oracle::kEdKeyTag);
    Dnskey zeros{0, 0, 0, Bytes(8, 0)};
    EXPECT_EQ(key_tag(zeros), 0);
}

TEST(Ds, WorkedExamples) {
    const Ds rfc = make_ds(DnsName::parse(oracle::kRfcDnskeyOwner), parse_key(oracle::kRfcDnskey));
    EXPECT_EQ(rfc.key_tag, oracle::kRfcKeyTag);
    EXPECT_EQ(to_hex(rfc.digest), oracle::kRfcDsSha256);

    const Ds ed = make_ds(DnsName::parse(oracle::kEdOwner), parse_key(oracle::kEdDnskey));
    EXPECT_EQ(ed, std::get<Ds>(parse_rdata(rrtype::DS, oracle::kEdDs)));
    EXPECT_TRUE(ds_matches_key(ed, DnsName::parse("EXAMPLE.com."), parse_key(oracle::kEdDnskey)));
    EXPECT_FALSE(ds_matches_key(ed, DnsName::parse("other.com."), parse_key(oracle::kEdDnskey)));
    EXPECT_NE(make_ds(DnsName::parse("other.com."), parse_key(oracle::kEdDnskey)).digest, ed.digest);

    try {
        make_ds(DnsName::parse(oracle::kEdOwner), parse_key(oracle::kEdDnskey), 1);
        FAIL();
    } catch (const DnssecError& e) {
        EXPECT_EQ(e.code(), DnssecErrc::UnsupportedDigestType);
    }
}

TEST(Signing, Ed25519WorkedExampleIsByteExact) {
    const auto key = KeyPair::from_private(15, KeyRole::KSK, from_base64(oracle::kEdPrivate));
    EXPECT_EQ(key.dnskey(), parse_key(oracle::kEdDnskey));
    const auto owner = DnsName::parse(oracle::kEdOwner);
    std::vector<ResourceRecord> mx = {ResourceRecord::opaque(
        owner, rrtype::MX, oracle::kEdMxTtl, Bytes{0, 10, 4, 'm', 'a', 'i', 'l', 7, 'e', 'x', 'a', 'm', 'p', 'l', 'e', 3, 'c', 'o', 'm', 0})};
    const auto sig = sign_rrset(mx, signature_meta(mx[0], key.dnskey(), owner, oracle::kEdInception, oracle::kEdExpiration), key);
    EXPECT_EQ(to_base64(sig.signature), oracle::kEdMxSignature);
    EXPECT_EQ(sig.labels, 2);
    EXPECT_EQ(verify_rrsig(mx, sig, key.dnskey(), oracle::kEdInception + 1), VerifyOutcome::Valid);
}

TEST(Signing, MatchesIndependentSignerOnFixture) {
    for (const std::uint8_t alg : {8, 13, 15}) {
        const KeyPair key = fixture_key(alg);
        const std::string_view expected_key = alg == 8 ? oracle::kRsaDnskey : alg == 13 ? oracle::kEcDnskey : oracle::kEd25519Dnskey;
        const std::uint16_t expected_tag = alg == 8 ? oracle::kRsaKeyTag : alg == 13 ? oracle::kEcKeyTag : oracle::kEd25519KeyTag;
        const std::string_view expected_sig =
            alg == 8 ? oracle::kRsaSignature : alg == 13 ? oracle::kEcSignature : oracle::kEd25519Signature;
        SCOPED_TRACE(static_cast<int>(alg));
        EXPECT_EQ(to_base64(key.dnskey().public_key), expected_key);
        EXPECT_EQ(key.key_tag(), expected_tag);
        EXPECT_EQ(key.dnskey().flags, 257);

        const auto rrset = fixture_rrset();
        const Rrsig ours = sign_rrset(rrset, fixture_meta(key), key);
        Rrsig theirs = fixture_meta(key);
        theirs.signature = from_base64(expected_sig);
        // Deterministic schemes must agree byte for byte; ECDSA must cross-verify.
        if (alg != 13) EXPECT_EQ(to_base64(ours.signature), expected_sig);
        EXPECT_EQ(verify_rrsig(rrset, theirs, key.dnskey(), kInside), VerifyOutcome::Valid);
        EXPECT_EQ(verify_rrsig(rrset, ours, key.dnskey(), kInside), VerifyOutcome::Valid);
    }
}

TEST(Signing, MetaMismatchAndUnsupported) {
    const KeyPair key = fixture_key(15);
    const auto rrset = fixture_rrset();
    Rrsig meta = fixture_meta(key);
    meta.key_tag ^= 1;
    try {
        sign_rrset(rrset, meta, key);
        FAIL();
    } catch (const DnssecError& e) {
        EXPECT_EQ(e.code(), DnssecErrc::MetaMismatch);
    }
    meta = fixture_meta(key);
    meta.signer_name = DnsName::parse("elsewhere.test.");
    EXPECT_THROW(sign_rrset(rrset, meta, key), DnssecError);
    try {
        KeyPair::generate(16, KeyRole::ZSK, seeded_bytes("s", "x"));
        FAIL();
    } catch (const DnssecError& e) {
        EXPECT_EQ(e.code(), DnssecErrc::UnsupportedAlgorithm);
    }
}

TEST(Verify, OutcomesWithoutCryptoForUnvalidatableAlgorithms) {
    const KeyPair key = fixture_key(8);
    const auto rrset = fixture_rrset();
    Rrsig sig = sign_rrset(rrset, fixture_meta(key), key);

    Rrsig unknown = sig;
    unknown.algorithm = 100;
    EXPECT_EQ(verify_rrsig(rrset, unknown, key.dnskey(), kInside), VerifyOutcome::AlgorithmUnknown);
    unknown.signature.clear();
    EXPECT_EQ(verify_rrsig(rrset, unknown, key.dnskey(), kInside), VerifyOutcome::AlgorithmUnknown);

    Rrsig ed448 = sig;
    ed448.algorithm = 16;
    EXPECT_EQ(verify_rrsig(rrset, ed448, key.dnskey(), kInside), VerifyOutcome::AlgorithmUnsupported);

    const KeyPair ed = fixture_key(15);
    Rrsig ed_sig = sign_rrset(rrset, fixture_meta(ed), ed);
    EXPECT_EQ(verify_rrsig(rrset, ed_sig, ed.dnskey(), kInside, AlgorithmSupport::parse("8,13")),
              VerifyOutcome::AlgorithmUnsupported);
}

TEST(Verify, WindowKeyAndContentChecks) {
    const KeyPair key = fixture_key(13);
    const auto rrset = fixture_rrset();
    const Rrsig sig = sign_rrset(rrset, fixture_meta(key), key);
    EXPECT_EQ(verify_rrsig(rrset, sig, key.dnskey(), oracle::kFixtureExpiration), VerifyOutcome::Valid);
    EXPECT_EQ(verify_rrsig(rrset, sig, key.dnskey(), oracle::kFixtureExpiration + 1), VerifyOutcome::OutsideValidity);
    EXPECT_EQ(verify_rrsig(rrset, sig, key.dnskey(), oracle::kFixtureInception - 1), VerifyOutcome::OutsideValidity);

    // Same tag, different algorithm: rejected before any cryptography.
    Dnskey other = fixture_key(8).dnskey();
    EXPECT_EQ(verify_rrsig(rrset, sig, other, kInside), VerifyOutcome::KeyMismatch);
    Dnskey not_zone = key.dnskey();
    not_zone.flags = 0;
    EXPECT_EQ(verify_rrsig(rrset, sig, not_zone, kInside), VerifyOutcome::KeyMismatch);

    auto tampered = rrset;
    std::get<ARdata>(tampered[0].rdata).address[3] = 9;
    EXPECT_EQ(verify_rrsig(tampered, sig, key.dnskey(), kInside), VerifyOutcome::InvalidSignature);

    // Order and owner case do not matter.
    auto shuffled = rrset;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto& rr : shuffled) rr.name = DnsName::parse("www.example.TEST.");
    EXPECT_EQ(verify_rrsig(shuffled, sig, key.dnskey(), kInside), VerifyOutcome::Valid);
}

TEST(Keys, SeededGenerationIsDeterministic) {
    for (const std::uint8_t alg : {13, 15}) {
        const auto a = KeyPair::generate(alg, KeyRole::ZSK, seeded_bytes("seed-1", "zone"));
        const auto b = KeyPair::generate(alg, KeyRole::ZSK, seeded_bytes("seed-1", "zone"));
        const auto c = KeyPair::generate(alg, KeyRole::ZSK, seeded_bytes("seed-2", "zone"));
        EXPECT_EQ(a.dnskey(), b.dnskey());
        EXPECT_NE(a.dnskey(), c.dnskey());
        EXPECT_EQ(a.dnskey().flags, 256);
    }
    const auto r1 = KeyPair::generate(8, KeyRole::KSK, seeded_bytes("seed-1", "rsa"), 1024);
    const auto r2 = KeyPair::generate(8, KeyRole::KSK, seeded_bytes("seed-1", "rsa"), 1024);
    EXPECT_EQ(r1.dnskey(), r2.dnskey());
    EXPECT_EQ(r1.private_material(), r2.private_material());
    EXPECT_EQ(r1.dnskey().public_key.size(), 1u + 3u + 128u);
}

TEST(Keys, JsonRoundTrip) {
    for (const std::uint8_t alg : {8, 13, 15}) {
        const KeyPair key = fixture_key(alg);
        const KeyPair back = KeyPair::from_json(key.to_json());
        EXPECT_EQ(back.dnskey(), key.dnskey());
        EXPECT_EQ(back.role(), KeyRole::KSK);
        EXPECT_EQ(back.private_material(), key.private_material());
    }
    std::string json = fixture_key(15).to_json();
    json.replace(json.find("\"KSK\""), 5, "\"ZSK\"");
    EXPECT_THROW(KeyPair::from_json(json), DnssecError);
    EXPECT_THROW(KeyPair::from_json("{"), DnssecError);
}

TEST(Signing, RandomRrsetsAndBitFlips) {
    testing_support::Rng rng(3);
    for (const std::uint8_t alg : {8, 13, 15}) {
        const KeyPair key = KeyPair::generate(alg, KeyRole::ZSK, seeded_bytes("unit", std::to_string(alg)), 1024);
        for (int i = 0; i < 10; ++i) {
            auto rrset = testing_support::random_a_rrset(rng, 1 + rng() % 4);
            const auto meta = signature_meta(rrset[0], key.dnskey(), rrset[0].name.parent(), 1000, 5000);
            const Rrsig sig = sign_rrset(rrset, meta, key);
            ASSERT_EQ(verify_rrsig(rrset, sig, key.dnskey(), 2000), VerifyOutcome::Valid);
            auto& addr = std::get<ARdata>(rrset[rng() % rrset.size()].rdata).address;
            addr[rng() % 4] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
            ASSERT_EQ(verify_rrsig(rrset, sig, key.dnskey(), 2000), VerifyOutcome::InvalidSignature);
        }
    }
}
