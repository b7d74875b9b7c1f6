#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agility/dnssec.hpp"
#include "agility/message.hpp"
#include "agility/net.hpp"

namespace agility {

/// Which messages a rule applies to and which records it may touch.
///
/// A rule applies when the question name is at or below `suffix` and the
/// question type is in `rrtypes` (empty = any). It then acts on records in
/// `section` (all sections when unset) owned at or below `suffix` whose type,
/// or covered type for RRSIGs, is in `rrtypes`.
struct MatchSpec {
    DnsName suffix;
    std::vector<std::uint16_t> rrtypes;
    std::optional<Section> section;

    bool operator==(const MatchSpec&) const = default;
};

/// Replacement signatures for RRsets an action has rewritten.
struct Resign {
    KeyPair key;
    DnsName signer;
};

namespace action {

/// Signature bytes are left untouched, so the RRSIG no longer verifies.
struct RewriteRrsigAlg {
    std::uint8_t to = kDefaultUnknownAlgorithm;
    std::optional<std::uint8_t> from;
};
struct RewriteDnskeyAlg {
    std::uint8_t to = kDefaultUnknownAlgorithm;
    std::optional<std::uint8_t> from;
};
/// Each DS is replaced by one copy per algorithm in `to`; tag and digest are kept.
struct RewriteDsAlg {
    std::vector<std::uint8_t> to{kDefaultUnknownAlgorithm};
    std::optional<Resign> resign;
};
struct RewriteDsDigestType {
    std::uint8_t to = 0;
    std::optional<Resign> resign;
};
struct RewriteDsKeyTag {
    std::uint16_t to = 0;
    std::optional<Resign> resign;
};
/// Added to `section` (answer when unset), optionally replacing records of the same name and type.
struct InjectRecord {
    ResourceRecord record;
    bool replace_existing = true;
};
/// Replaces matched DNSKEY RRsets with `keys`. With `resign`, every matched
/// RRset in the section loses its RRSIGs and gets one by the resign key.
struct ReplaceDnskeyRrset {
    std::vector<Dnskey> keys;
    std::optional<Resign> resign;
};
/// Removes matched RRSIGs; only those with an algorithm in `algorithms` when non-empty.
struct StripRrsigs {
    std::vector<std::uint8_t> algorithms;
};

}  // namespace action

using MutationAction = std::variant<action::RewriteRrsigAlg, action::RewriteDnskeyAlg, action::RewriteDsAlg,
                                    action::RewriteDsDigestType, action::RewriteDsKeyTag, action::InjectRecord,
                                    action::ReplaceDnskeyRrset, action::StripRrsigs>;

struct MutationRule {
    MatchSpec match;
    MutationAction action;
    /// Throw RuleTargetAbsent when the rule applies to a message but changes nothing.
    bool required = false;

    std::string describe() const;
};

struct MutationContext {
    /// Clock for re-signing; signatures run from now - 1h to now + 7d.
    std::uint32_t now = 0;
};

/// Applies `rules` in order. Messages without a matching question pass through unchanged.
/// Throws MutationError(RuleTargetAbsent) for required rules that found nothing to change.
DnsMessage apply_rules(const DnsMessage& msg, std::span<const MutationRule> rules, const MutationContext& context);

/// True when `rule` applies to `msg`'s question.
bool rule_applies(const MutationRule& rule, const DnsMessage& msg);

// --- scenarios ---------------------------------------------------------------------

enum class Classification { Vulnerable, Compliant, DowngradedBySpec, Error };
std::string_view to_string(Classification c) noexcept;
std::optional<Classification> classification_from_string(std::string_view text) noexcept;

enum class ScenarioId { S1, S2, S3, S4, S5 };
std::string_view to_string(ScenarioId id) noexcept;
/// Accepts "S1".."S5" (case-insensitive). Throws MutationError(InvalidScenario).
ScenarioId scenario_from_string(std::string_view text);
inline constexpr std::array<ScenarioId, 5> kAllScenarios = {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3,
                                                           ScenarioId::S4, ScenarioId::S5};

/// The names and keys a scenario needs from the fixture it attacks.
struct FixtureDescription {
    DnsName anchor;
    DnsName victim_zone;
    DnsName victim_target;  // the A record the attacker forges
    std::set<std::uint8_t> victim_algorithms;
    DnsName multi_zone;
    DnsName multi_target;
    std::set<std::uint8_t> multi_algorithms;
    /// Parent ZSK used to re-sign rewritten DS RRsets (experimenter-controlled DS).
    std::optional<KeyPair> parent_zsk;
    DnsName parent_zone;
    std::optional<KeyPair> attacker_key;
    std::array<std::uint8_t, 4> attacker_address{192, 0, 2, 66};
    std::uint32_t target_ttl = 300;
    AlgorithmSupport profile;
};

struct AttackScenario {
    std::string id;
    std::string description;
    std::vector<MutationRule> rules;
    Classification expected_strict = Classification::Compliant;
    /// CLI name of the policy this scenario is designed to defeat.
    std::string expected_vulnerable_policy;
    /// Records whose presence in a response marks a successful forgery.
    std::vector<ResourceRecord> forged_records;
    /// Key tag whose signatures mark attacker-keyed data, if any.
    std::optional<std::uint16_t> attacker_key_tag;

    std::string to_json() const;
    /// Throws MutationError(InvalidScenario).
    static AttackScenario from_json(std::string_view text);
};

/// Throws MutationError(FixtureMismatch) when the fixture lacks what the scenario attacks.
AttackScenario make_scenario(ScenarioId id, const FixtureDescription& fixture);

/// {"scenarios": [...]}
std::string scenarios_to_json(std::span<const AttackScenario> scenarios);
std::vector<AttackScenario> scenarios_from_json(std::string_view text);

// --- proxy -------------------------------------------------------------------------

struct ProxyOptions {
    std::chrono::milliseconds upstream_timeout{2000};
    /// Answer SERVFAIL instead of staying silent when upstream does not respond.
    bool servfail_on_timeout = false;
    MutationContext context;
    ListenerOptions listener;
};

/// Forwards each request verbatim to `upstream` over the same transport and
/// applies `rules` to the response. Responses no rule changes are relayed byte
/// for byte.
RequestHandler proxy_handler(Endpoint upstream, std::vector<MutationRule> rules, ProxyOptions options = {});

/// Throws NetError(BindFailure).
std::unique_ptr<DnsListener> start_proxy(const Endpoint& listen, const Endpoint& upstream,
                                         std::vector<MutationRule> rules, const ProxyOptions& options = {});

}  // namespace agility
