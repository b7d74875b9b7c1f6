#include <gtest/gtest.h>

#include "agility/errors.hpp"
#include "agility/mutator.hpp"
#include "agility/server.hpp"
#include "agility/text.hpp"
#include "random_message.hpp"

using namespace agility;

namespace {

constexpr std::uint32_t kNow = 1700000000;

ResourceRecord a(const char* owner, std::array<std::uint8_t, 4> addr) {
    return ResourceRecord::make(DnsName::parse(owner), 300, ARdata{addr});
}

ZoneConfig zone(const char* apex, std::vector<KeySpec> keys, std::vector<ResourceRecord> records,
                std::vector<ChildSpec> children = {}) {
    ZoneConfig c;
    c.apex = DnsName::parse(apex);
    c.keys = std::move(keys);
    c.records = std::move(records);
    c.children = std::move(children);
    return c;
}

struct World {
    ZoneTree tree;
    FixtureDescription fixture;
};

const World& world() {
    static const World w = [] {
        ZoneBuildOptions o;
        o.now = kNow;
        o.seed = "mutator-tests";
        o.rsa_bits = 1024;
        World out;
        out.tree = ZoneTree::build(
            {zone("test.", {{8, KeyRole::KSK, {}}, {8, KeyRole::ZSK, {}}}, {a("ns1.test.", {10, 0, 0, 53})},
                  {{DnsName::parse("victim.test."), DsPolicy::FromChildKeys, {}},
                   {DnsName::parse("multi.test."), DsPolicy::FromChildKeys, {}}}),
             zone("victim.test.", {{8, KeyRole::KSK, {}}, {8, KeyRole::ZSK, {}}}, {a("www.victim.test.", {10, 0, 0, 1})}),
             zone("multi.test.", {{8, KeyRole::KSK, {}}, {8, KeyRole::ZSK, {}}, {13, KeyRole::KSK, {}}, {13, KeyRole::ZSK, {}}},
                  {a("www.multi.test.", {10, 0, 0, 1})})},
            o);
        auto& f = out.fixture;
        f.anchor = f.parent_zone = DnsName::parse("test.");
        f.victim_zone = DnsName::parse("victim.test.");
        f.victim_target = DnsName::parse("www.victim.test.");
        f.victim_algorithms = {8};
        f.multi_zone = DnsName::parse("multi.test.");
        f.multi_target = DnsName::parse("www.multi.test.");
        f.multi_algorithms = {8, 13};
        f.parent_zsk = out.tree.anchor().keys_with_role(KeyRole::ZSK).front();
        f.attacker_key = KeyPair::generate(8, KeyRole::KSK, seeded_bytes("mutator-tests", "attacker"), 1024);
        f.profile = AlgorithmSupport::parse("8,13");
        return out;
    }();
    return w;
}

DnsMessage ask(const char* name, std::uint16_t type) {
    return answer_query(world().tree, make_query(9, DnsName::parse(name), type, true));
}

DnsMessage attack(ScenarioId id, const DnsMessage& response) {
    const auto scenario = make_scenario(id, world().fixture);
    return apply_rules(response, scenario.rules, MutationContext{kNow});
}

std::vector<ResourceRecord> of_type(const std::vector<ResourceRecord>& rrs, std::uint16_t type) {
    std::vector<ResourceRecord> out;
    for (const auto& rr : rrs)
        if (rr.type == type) out.push_back(rr);
    return out;
}

const Dnskey& zone_key(const char* apex, std::uint16_t tag) {
    for (const auto& k : world().tree.zone(DnsName::parse(apex))->keys())
        if (k.key_tag() == tag) return k.dnskey();
    throw std::runtime_error("no such key");
}

MutationRule rule(const char* suffix, std::vector<std::uint16_t> types, MutationAction action, bool required = false) {
    return MutationRule{MatchSpec{DnsName::parse(suffix), std::move(types), Section::Answer}, std::move(action), required};
}

}  // namespace

TEST(ApplyRules, EmptyRuleListIsIdentity) {
    testing_support::Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const DnsMessage msg = testing_support::random_message(rng);
        EXPECT_EQ(apply_rules(msg, {}, {}), msg);
    }
}

TEST(ApplyRules, OtherQuestionsPassUntouched) {
    const auto scenario = make_scenario(ScenarioId::S1, world().fixture);
    const DnsMessage other = ask("www.multi.test.", rrtype::A);
    EXPECT_EQ(apply_rules(other, scenario.rules, {kNow}), other);
    const DnsMessage soa = ask("victim.test.", rrtype::SOA);
    EXPECT_EQ(apply_rules(soa, scenario.rules, {kNow}), soa);
}

TEST(ApplyRules, RequiredRuleWithNothingToChangeThrows) {
    const DnsMessage msg = ask("www.victim.test.", rrtype::A);
    const std::vector<MutationRule> rules{rule("victim.test.", {rrtype::A}, action::StripRrsigs{{13}}, true)};
    try {
        apply_rules(msg, rules, {kNow});
        FAIL() << "expected RuleTargetAbsent";
    } catch (const MutationError& e) {
        EXPECT_EQ(e.code(), MutationErrc::RuleTargetAbsent);
    }
    auto optional_rules = rules;
    optional_rules[0].required = false;
    EXPECT_EQ(apply_rules(msg, optional_rules, {kNow}), msg);
}

TEST(ApplyRules, InjectReplacesOrAppends) {
    const DnsMessage msg = ask("www.victim.test.", rrtype::A);
    const auto fake = a("www.victim.test.", {6, 6, 6, 6});
    const auto replaced = apply_rules(msg, std::vector{rule("victim.test.", {}, action::InjectRecord{fake, true})}, {});
    ASSERT_EQ(of_type(replaced.answers, rrtype::A).size(), 1u);
    EXPECT_EQ(of_type(replaced.answers, rrtype::A)[0], fake);
    EXPECT_EQ(replaced.answers[0], fake);  // keeps the original position
    const auto added = apply_rules(msg, std::vector{rule("victim.test.", {}, action::InjectRecord{fake, false})}, {});
    EXPECT_EQ(of_type(added.answers, rrtype::A).size(), 2u);
}

TEST(ApplyRules, DnskeyAndDsFieldRewrites) {
    const DnsMessage keys = ask("victim.test.", rrtype::DNSKEY);
    const auto rewritten =
        apply_rules(keys, std::vector{rule("victim.test.", {rrtype::DNSKEY}, action::RewriteDnskeyAlg{100, 8})}, {});
    for (const auto& k : of_type(rewritten.answers, rrtype::DNSKEY)) EXPECT_EQ(k.as<Dnskey>()->algorithm, 100);
    // RRSIGs over the DNSKEY RRset are not DNSKEY records and keep their algorithm
    for (const auto& s : of_type(rewritten.answers, rrtype::RRSIG)) EXPECT_EQ(s.as<Rrsig>()->algorithm, 8);

    const DnsMessage ds = ask("victim.test.", rrtype::DS);
    const auto digest = apply_rules(ds, std::vector{rule("victim.test.", {rrtype::DS}, action::RewriteDsDigestType{99, {}})}, {});
    const auto tag = apply_rules(ds, std::vector{rule("victim.test.", {rrtype::DS}, action::RewriteDsKeyTag{4242, {}})}, {});
    EXPECT_EQ(of_type(digest.answers, rrtype::DS)[0].as<Ds>()->digest_type, 99);
    EXPECT_EQ(of_type(tag.answers, rrtype::DS)[0].as<Ds>()->key_tag, 4242);
    // without resign the old signature stays and no longer matches
    EXPECT_EQ(of_type(tag.answers, rrtype::RRSIG), of_type(ds.answers, rrtype::RRSIG));
}

TEST(Scenario, S1RewritesRrsigAndForgesAnswer) {
    const DnsMessage out = attack(ScenarioId::S1, ask("www.victim.test.", rrtype::A));
    const auto sigs = of_type(out.answers, rrtype::RRSIG);
    ASSERT_EQ(sigs.size(), 1u);
    EXPECT_EQ(sigs[0].as<Rrsig>()->algorithm, kDefaultUnknownAlgorithm);
    const auto as = of_type(out.answers, rrtype::A);
    ASSERT_EQ(as.size(), 1u);
    EXPECT_EQ(as[0].as<ARdata>()->address, (std::array<std::uint8_t, 4>{192, 0, 2, 66}));
}

TEST(Scenario, S2SplitsDsAndResignsWithParent) {
    const DnsMessage original = ask("victim.test.", rrtype::DS);
    const DnsMessage out = attack(ScenarioId::S2, original);
    const auto ds = of_type(out.answers, rrtype::DS);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].as<Ds>()->algorithm, 15);
    EXPECT_EQ(ds[1].as<Ds>()->algorithm, 16);
    EXPECT_EQ(ds[0].as<Ds>()->digest, of_type(original.answers, rrtype::DS)[0].as<Ds>()->digest);
    const auto sigs = of_type(out.answers, rrtype::RRSIG);
    ASSERT_EQ(sigs.size(), 1u);
    const auto& sig = *sigs[0].as<Rrsig>();
    EXPECT_EQ(sig.signer_name, DnsName::parse("test."));
    EXPECT_EQ(verify_rrsig(ds, sig, world().fixture.parent_zsk->dnskey(), kNow), VerifyOutcome::Valid);
    // the forged A rides on the target query
    EXPECT_EQ(of_type(attack(ScenarioId::S2, ask("www.victim.test.", rrtype::A)).answers, rrtype::A)[0],
              make_scenario(ScenarioId::S2, world().fixture).forged_records[0]);
}

TEST(Scenario, S3PicksSupportedAlgorithmUnusedByChild) {
    const DnsMessage out = attack(ScenarioId::S3, ask("victim.test.", rrtype::DS));
    const auto ds = of_type(out.answers, rrtype::DS);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].as<Ds>()->algorithm, 13);
}

TEST(Scenario, S4LeavesOnlyUnknownSignature) {
    const DnsMessage original = ask("www.multi.test.", rrtype::A);
    ASSERT_EQ(of_type(original.answers, rrtype::RRSIG).size(), 2u);
    const DnsMessage out = attack(ScenarioId::S4, original);
    const auto sigs = of_type(out.answers, rrtype::RRSIG);
    ASSERT_EQ(sigs.size(), 1u);
    EXPECT_EQ(sigs[0].as<Rrsig>()->algorithm, kDefaultUnknownAlgorithm);
    EXPECT_EQ(of_type(out.answers, rrtype::A)[0].as<ARdata>()->address, (std::array<std::uint8_t, 4>{192, 0, 2, 66}));
}

TEST(Scenario, S5ForgedChainVerifiesUnderAttackerKey) {
    const auto& attacker = *world().fixture.attacker_key;
    const DnsMessage keys = attack(ScenarioId::S5, ask("victim.test.", rrtype::DNSKEY));
    const auto dnskeys = of_type(keys.answers, rrtype::DNSKEY);
    ASSERT_EQ(dnskeys.size(), 1u);
    EXPECT_EQ(*dnskeys[0].as<Dnskey>(), attacker.dnskey());
    const auto key_sigs = of_type(keys.answers, rrtype::RRSIG);
    ASSERT_EQ(key_sigs.size(), 1u);
    EXPECT_EQ(verify_rrsig(dnskeys, *key_sigs[0].as<Rrsig>(), attacker.dnskey(), kNow), VerifyOutcome::Valid);

    const DnsMessage target = attack(ScenarioId::S5, ask("www.victim.test.", rrtype::A));
    const auto as = of_type(target.answers, rrtype::A);
    const auto a_sigs = of_type(target.answers, rrtype::RRSIG);
    ASSERT_EQ(as.size(), 1u);
    ASSERT_EQ(a_sigs.size(), 1u);
    EXPECT_EQ(a_sigs[0].as<Rrsig>()->key_tag, attacker.key_tag());
    EXPECT_EQ(verify_rrsig(as, *a_sigs[0].as<Rrsig>(), attacker.dnskey(), kNow), VerifyOutcome::Valid);

    const auto ds = of_type(attack(ScenarioId::S5, ask("victim.test.", rrtype::DS)).answers, rrtype::DS);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].as<Ds>()->algorithm, kDefaultUnknownAlgorithm);
}

TEST(Scenario, ExpectationsFollowProfile) {
    EXPECT_EQ(make_scenario(ScenarioId::S2, world().fixture).expected_strict, Classification::DowngradedBySpec);
    auto wide = world().fixture;
    wide.profile = AlgorithmSupport::parse("8,13,15");
    EXPECT_EQ(make_scenario(ScenarioId::S2, wide).expected_strict, Classification::Compliant);
    EXPECT_EQ(make_scenario(ScenarioId::S5, wide).expected_strict, Classification::DowngradedBySpec);
}

TEST(Scenario, FixtureMismatchIsReported) {
    const auto expect_mismatch = [](ScenarioId id, const FixtureDescription& f) {
        try {
            make_scenario(id, f);
            ADD_FAILURE() << "expected FixtureMismatch for " << to_string(id);
        } catch (const MutationError& e) {
            EXPECT_EQ(e.code(), MutationErrc::FixtureMismatch);
        }
    };
    auto unsigned_victim = world().fixture;
    unsigned_victim.victim_algorithms.clear();
    expect_mismatch(ScenarioId::S1, unsigned_victim);
    auto single = world().fixture;
    single.multi_algorithms = {8};
    expect_mismatch(ScenarioId::S4, single);
    auto narrow = world().fixture;
    narrow.profile = AlgorithmSupport::parse("8");
    expect_mismatch(ScenarioId::S3, narrow);
    auto keyless = world().fixture;
    keyless.attacker_key.reset();
    expect_mismatch(ScenarioId::S5, keyless);
    keyless.parent_zsk.reset();
    expect_mismatch(ScenarioId::S2, keyless);
}

TEST(Scenario, IdsParse) {
    EXPECT_EQ(scenario_from_string("s3"), ScenarioId::S3);
    EXPECT_EQ(scenario_from_string("S5"), ScenarioId::S5);
    EXPECT_THROW(scenario_from_string("S6"), MutationError);
    EXPECT_THROW(scenario_from_string(""), MutationError);
    EXPECT_EQ(classification_from_string("DowngradedBySpec"), Classification::DowngradedBySpec);
    EXPECT_FALSE(classification_from_string("Secure"));
}

TEST(Scenario, JsonRoundTripPreservesBehaviour) {
    std::vector<AttackScenario> all;
    for (const auto id : kAllScenarios) all.push_back(make_scenario(id, world().fixture));
    const auto text = scenarios_to_json(all);
    const auto back = scenarios_from_json(text);
    ASSERT_EQ(back.size(), all.size());
    EXPECT_EQ(scenarios_to_json(back), text);
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(back[i].forged_records, all[i].forged_records);
        for (const char* q : {"www.victim.test.", "www.multi.test."}) {
            const auto msg = ask(q, rrtype::A);
            EXPECT_EQ(apply_rules(msg, back[i].rules, {kNow}), apply_rules(msg, all[i].rules, {kNow}));
        }
    }
    EXPECT_THROW(scenarios_from_json("{\"scenarios\": [{\"id\": \"x\", \"rules\": [{\"match\": {\"suffix\": \"a.\"}, "
                                     "\"action\": {\"type\": \"explode\"}}]}]}"),
                 MutationError);
    EXPECT_THROW(scenarios_from_json("not json"), MutationError);
}

TEST(Scenario, DescribeNamesActionAndScope) {
    const auto s = make_scenario(ScenarioId::S1, world().fixture);
    EXPECT_EQ(s.rules[0].describe(), "RewriteRrsigAlg(100) on www.victim.test./A/answer");
}

TEST(Proxy, EmptyRulesRelayBytesVerbatim) {
    auto authority = serve(Endpoint{"127.0.0.1", 0}, world().tree);
    auto proxy = start_proxy(Endpoint{"127.0.0.1", 0}, authority->endpoint(), {});
    for (const char* name : {"www.victim.test.", "victim.test.", "nope.victim.test."})
        for (const auto transport : {Transport::Udp, Transport::Tcp}) {
            const Bytes q = encode_message(make_query(321, DnsName::parse(name), rrtype::A, true));
            EXPECT_EQ(exchange_raw(proxy->endpoint(), q, transport, std::chrono::milliseconds(2000)),
                      exchange_raw(authority->endpoint(), q, transport, std::chrono::milliseconds(2000)));
        }
}

TEST(Proxy, RulesApplyOverLoopback) {
    auto authority = serve(Endpoint{"127.0.0.1", 0}, world().tree);
    const auto scenario = make_scenario(ScenarioId::S1, world().fixture);
    ProxyOptions options;
    options.context.now = kNow;
    auto proxy = start_proxy(Endpoint{"127.0.0.1", 0}, authority->endpoint(), scenario.rules, options);
    const DnsMessage q = make_query(55, DnsName::parse("www.victim.test."), rrtype::A, true);
    const DnsMessage direct = exchange(authority->endpoint(), q);
    EXPECT_EQ(exchange(proxy->endpoint(), q), apply_rules(direct, scenario.rules, {kNow}));
    ClientOptions tcp;
    tcp.tcp_only = true;
    EXPECT_EQ(exchange(proxy->endpoint(), q, tcp), apply_rules(direct, scenario.rules, {kNow}));
}

TEST(Proxy, UpstreamDownMeansSilenceOrServfail) {
    Endpoint dead;
    {
        auto gone = serve(Endpoint{"127.0.0.1", 0}, world().tree);
        dead = gone->endpoint();
    }
    ProxyOptions options;
    options.upstream_timeout = std::chrono::milliseconds(200);
    ClientOptions client;
    client.timeout = std::chrono::milliseconds(800);
    const DnsMessage q = make_query(56, DnsName::parse("www.victim.test."), rrtype::A, true);
    {
        auto proxy = start_proxy(Endpoint{"127.0.0.1", 0}, dead, {}, options);
        EXPECT_THROW(exchange(proxy->endpoint(), q, client), NetError);
    }
    options.servfail_on_timeout = true;
    auto proxy = start_proxy(Endpoint{"127.0.0.1", 0}, dead, {}, options);
    const DnsMessage reply = exchange(proxy->endpoint(), q, client);
    EXPECT_EQ(reply.header.rcode, rcode::ServFail);
    EXPECT_EQ(reply.header.id, 56);
    EXPECT_TRUE(reply.answers.empty());
}
