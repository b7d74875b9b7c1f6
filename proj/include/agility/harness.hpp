#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agility/mutator.hpp"
#include "agility/net.hpp"
#include "agility/validator.hpp"
#include "agility/zone.hpp"

namespace agility {

// --- fixture -----------------------------------------------------------------------

/// 2026-01-01T00:00:00Z. The default injected clock.
inline constexpr std::uint32_t kDefaultFixtureNow = 1767225600;
inline constexpr std::string_view kFixtureSeedVariable = "AGILITY_FIXTURE_SEED";
inline constexpr std::string_view kBuiltinFixtureSeed = "agility-default-fixture";

/// $AGILITY_FIXTURE_SEED when set and non-empty, otherwise the built-in seed.
std::string default_fixture_seed();

struct FixtureOptions {
    std::string seed = default_fixture_seed();
    std::uint32_t now = kDefaultFixtureNow;
    unsigned rsa_bits = 2048;
    /// Algorithms the in-process validator implements.
    AlgorithmSupport profile = AlgorithmSupport::parse("8,13");
};

/// Which fixture names the scenarios attack.
struct FixtureRoles {
    DnsName victim_zone = DnsName::parse("victim.test.");
    DnsName victim_target = DnsName::parse("www.victim.test.");
    DnsName multi_zone = DnsName::parse("multi.test.");
    DnsName multi_target = DnsName::parse("www.multi.test.");
};

/// test. (alg 8) delegating to victim.test. (alg 8), multi.test. (algs 8 and 13)
/// and unsigned.test. (no DS). Every target is an A record with 10.0.0.1.
std::vector<ZoneConfig> default_fixture_configs();

/// A built zone tree plus everything a scenario run needs to know about it.
struct Fixture {
    ZoneTree tree;
    FixtureDescription description;
    TrustAnchor anchor;
    std::uint32_t now = kDefaultFixtureNow;
    std::string seed;

    /// SHA-256 (hex) over zone contents and public keys. Stable for a seed.
    std::string hash() const;
    /// The configs with every generated key filled in, so the tree can be rebuilt exactly.
    std::vector<ZoneConfig> configs_with_keys() const;
};

/// Throws ZoneError, or MutationError(FixtureMismatch) when a role zone is missing.
Fixture build_fixture(std::vector<ZoneConfig> configs, const FixtureOptions& options = {}, const FixtureRoles& roles = {});
inline Fixture build_default_fixture(const FixtureOptions& options = {}) {
    return build_fixture(default_fixture_configs(), options);
}

// --- probing -----------------------------------------------------------------------

struct InProcessTarget {
    PolicyName policy = PolicyName::Strict;
};

/// A resolver run by the operator, configured to send the fixture zones to
/// the harness proxy at `proxy_listen`.
struct ExternalTarget {
    Endpoint resolver;
    Endpoint proxy_listen{"127.0.0.1", kDefaultServerPort + 1};
};

using ProbeTarget = std::variant<InProcessTarget, ExternalTarget>;
std::string target_label(const ProbeTarget& target);

/// The ethics guard for external probing: an explicit attestation plus an allow-list of resolvers.
struct ExternalProbeGate {
    bool operator_controls_resolver = false;
    std::vector<Endpoint> allow_list;
};

/// Throws HarnessError(EthicsGate) unless `resolver` passes the gate.
void check_external_allowed(const Endpoint& resolver, const ExternalProbeGate& gate);

struct RunOptions {
    ExternalProbeGate gate;
    std::chrono::milliseconds query_timeout{2000};
    /// Parallel matrix cells; each owns its servers.
    unsigned jobs = 1;
};

struct Evidence {
    std::string rcode;
    bool ad = false;
    std::string state;  // validator state; empty for external targets
    std::vector<std::string> answer;  // presentation form, signature bytes elided
    bool forged_observed = false;
    bool downgraded_by_spec = false;
    bool policy_deviation = false;
    std::vector<std::string> trace;

    bool operator==(const Evidence&) const = default;
};

struct ProbeOutcome {
    std::string scenario;
    std::string target;
    Classification classification = Classification::Error;
    std::string error;  // set when classification == Error
    Evidence evidence;

    bool operator==(const ProbeOutcome&) const = default;
};

/// In-process verdict for one validated walk.
Classification classify(const ValidationResult& result, const AttackScenario& scenario);
/// Verdict for a plain resolver response.
Classification classify_response(const DnsMessage& response, const AttackScenario& scenario);
/// True when `records` carry a forged record or a signature by the attacker key.
bool forged_present(std::span<const ResourceRecord> records, const AttackScenario& scenario);

/// Runs one cell on fresh loopback servers. Failures become Error outcomes;
/// only the ethics gate throws (HarnessError).
ProbeOutcome run_scenario(const AttackScenario& scenario, const ProbeTarget& target, const Fixture& fixture,
                          const RunOptions& options = {});

// --- matrix ------------------------------------------------------------------------

struct ReportMetadata {
    std::string fixture_hash;
    std::string timestamp;  // ISO 8601, UTC
    std::string seed;
    std::uint32_t now = 0;
    std::string supported_algorithms;

    bool operator==(const ReportMetadata&) const = default;
};

struct MatrixReport {
    static constexpr int kSchemaVersion = 1;

    ReportMetadata metadata;
    std::vector<std::string> scenarios;
    std::vector<std::string> targets;
    /// Row-major: targets[i] x scenarios[j] at i * scenarios.size() + j.
    std::vector<ProbeOutcome> cells;

    const ProbeOutcome& cell(std::string_view target, std::string_view scenario) const;
    std::map<std::string, std::size_t> summary() const;
    bool any(Classification c) const;

    std::string to_json() const;
    /// Throws HarnessError(InvalidReport).
    static MatrixReport from_json(std::string_view text);
    /// Grid with one row per target plus a legend.
    std::string to_table() const;

    bool operator==(const MatrixReport&) const = default;
};

/// Throws HarnessError(InvalidTarget) on empty lists.
MatrixReport run_matrix(std::span<const AttackScenario> scenarios, std::span<const ProbeTarget> targets,
                        const Fixture& fixture, const RunOptions& options = {});

/// S1..S5 for `fixture`.
std::vector<AttackScenario> default_scenarios(const Fixture& fixture);
/// One in-process target per policy.
std::vector<ProbeTarget> default_targets();

}  // namespace agility
