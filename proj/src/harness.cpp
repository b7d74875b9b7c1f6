#include "agility/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "agility/errors.hpp"
#include "agility/server.hpp"
#include "agility/text.hpp"

namespace agility {

using json = nlohmann::ordered_json;

std::string default_fixture_seed() {
    const char* env = std::getenv(std::string(kFixtureSeedVariable).c_str());
    return env && *env ? std::string(env) : std::string(kBuiltinFixtureSeed);
}

// --- fixture -----------------------------------------------------------------------

namespace {

ZoneConfig zone_config(const char* apex, std::vector<KeySpec> keys, std::vector<ChildSpec> children = {}) {
    ZoneConfig c;
    c.apex = DnsName::parse(apex);
    c.keys = std::move(keys);
    c.children = std::move(children);
    c.records.push_back(ResourceRecord::make(c.apex.prepend("www"), 300, ARdata{{10, 0, 0, 1}}));
    return c;
}

}  // namespace

std::vector<ZoneConfig> default_fixture_configs() {
    const KeySpec ksk8{algorithm::RSASHA256, KeyRole::KSK, {}}, zsk8{algorithm::RSASHA256, KeyRole::ZSK, {}};
    const KeySpec ksk13{algorithm::ECDSAP256SHA256, KeyRole::KSK, {}}, zsk13{algorithm::ECDSAP256SHA256, KeyRole::ZSK, {}};
    return {
        zone_config("test.", {ksk8, zsk8},
                    {{DnsName::parse("victim.test."), DsPolicy::FromChildKeys, {}},
                     {DnsName::parse("multi.test."), DsPolicy::FromChildKeys, {}},
                     {DnsName::parse("unsigned.test."), DsPolicy::Absent, {}}}),
        zone_config("victim.test.", {ksk8, zsk8}),
        zone_config("multi.test.", {ksk8, zsk8, ksk13, zsk13}),
        zone_config("unsigned.test.", {}),
    };
}

Fixture build_fixture(std::vector<ZoneConfig> configs, const FixtureOptions& options, const FixtureRoles& roles) {
    ZoneBuildOptions zone_options;
    zone_options.now = options.now;
    zone_options.seed = options.seed;
    zone_options.rsa_bits = options.rsa_bits;

    Fixture f;
    f.tree = ZoneTree::build(std::move(configs), zone_options);
    f.now = options.now;
    f.seed = options.seed;

    const SignedZone& anchor = f.tree.anchor();
    f.anchor = TrustAnchor{anchor.apex(), f.tree.trust_anchors(), {}};

    auto& d = f.description;
    d.anchor = anchor.apex();
    d.profile = options.profile;
    d.victim_zone = roles.victim_zone;
    d.victim_target = roles.victim_target;
    d.multi_zone = roles.multi_zone;
    d.multi_target = roles.multi_target;
    if (const SignedZone* victim = f.tree.zone(roles.victim_zone)) {
        for (const auto& k : victim->keys()) d.victim_algorithms.insert(k.dnskey().algorithm);
        if (const SignedZone* parent = f.tree.parent_of(*victim); parent && parent->is_signed()) {
            d.parent_zone = parent->apex();
            d.parent_zsk = parent->signing_zsks().front();
        }
    }
    if (const SignedZone* multi = f.tree.zone(roles.multi_zone))
        for (const auto& k : multi->keys()) d.multi_algorithms.insert(k.dnskey().algorithm);

    const RandomBytes random = options.seed.empty() ? system_bytes() : seeded_bytes(options.seed, "attacker");
    d.attacker_key = KeyPair::generate(algorithm::RSASHA256, KeyRole::KSK, random, options.rsa_bits);
    return f;
}

std::string Fixture::hash() const {
    std::vector<const SignedZone*> zones;
    for (const auto& zone : tree.zones()) zones.push_back(&zone);
    std::sort(zones.begin(), zones.end(), [](const SignedZone* a, const SignedZone* b) { return a->apex() < b->apex(); });
    std::string text = std::to_string(now) + "\n";
    for (const SignedZone* z : zones) {
        const SignedZone& zone = *z;
        text += "zone " + zone.apex().to_string() + "\n";
        for (const auto& k : zone.keys()) text += "key " + rdata_to_text(ResourceRecord::make(zone.apex(), 0, k.dnskey())) + "\n";
        for (const auto& [key, rrset] : zone.rrsets())
            for (const auto& rr : rrset.records) text += to_text(rr) + "\n";
        for (const auto& ds : zone.ds_published()) text += "ds " + rdata_to_text(ResourceRecord::make(zone.apex(), 0, ds)) + "\n";
    }
    if (description.attacker_key)
        text += "attacker " + rdata_to_text(ResourceRecord::make(DnsName{}, 0, description.attacker_key->dnskey())) + "\n";
    const Bytes digest = sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return to_hex(digest);
}

std::vector<ZoneConfig> Fixture::configs_with_keys() const {
    std::vector<ZoneConfig> out;
    for (const auto& zone : tree.zones()) {
        ZoneConfig c = zone.config();
        for (std::size_t i = 0; i < c.keys.size() && i < zone.keys().size(); ++i) c.keys[i].key = zone.keys()[i];
        out.push_back(std::move(c));
    }
    return out;
}

// --- probing -----------------------------------------------------------------------

std::string target_label(const ProbeTarget& target) {
    if (const auto* in = std::get_if<InProcessTarget>(&target)) return std::string(cli_name(in->policy));
    return "resolver:" + std::get<ExternalTarget>(target).resolver.to_string();
}

void check_external_allowed(const Endpoint& resolver, const ExternalProbeGate& gate) {
    if (!gate.operator_controls_resolver)
        throw HarnessError(HarnessErrc::EthicsGate,
                           "external probing sends attack traffic to " + resolver.to_string() +
                               "; only probe resolvers you operate and confirm with --i-control-this-resolver");
    if (std::find(gate.allow_list.begin(), gate.allow_list.end(), resolver) == gate.allow_list.end())
        throw HarnessError(HarnessErrc::EthicsGate, resolver.to_string() + " is not on the resolver allow-list");
}

bool forged_present(std::span<const ResourceRecord> records, const AttackScenario& scenario) {
    return std::any_of(records.begin(), records.end(), [&](const ResourceRecord& rr) {
        if (scenario.attacker_key_tag)
            if (const auto* sig = rr.as<Rrsig>(); sig && sig->key_tag == *scenario.attacker_key_tag) return true;
        return std::any_of(scenario.forged_records.begin(), scenario.forged_records.end(), [&](const ResourceRecord& f) {
            return rr.name == f.name && rr.type == f.type && rr.rdata == f.rdata;
        });
    });
}

Classification classify(const ValidationResult& result, const AttackScenario& scenario) {
    if (result.disposition == Disposition::ServFail) return Classification::Compliant;
    const bool forged = forged_present(result.answer, scenario);
    if (forged && result.policy_deviation) return Classification::Vulnerable;
    if (result.downgraded_by_spec) return Classification::DowngradedBySpec;
    if (forged) return Classification::Vulnerable;
    if (result.ad && result.state != SecurityState::Secure) return Classification::Vulnerable;
    return Classification::Compliant;
}

Classification classify_response(const DnsMessage& response, const AttackScenario& scenario) {
    if (response.header.rcode == rcode::ServFail) return Classification::Compliant;
    if (forged_present(response.answers, scenario)) return Classification::Vulnerable;
    return response.header.ad ? Classification::Compliant : Classification::DowngradedBySpec;
}

namespace {

std::vector<std::string> answer_text(const std::vector<ResourceRecord>& records) {
    std::vector<std::string> out;
    for (const auto& rr : records) {
        if (const auto* sig = rr.as<Rrsig>()) {
            ResourceRecord copy = rr;
            copy.as<Rrsig>()->signature.clear();
            std::string text = to_text(copy);
            while (!text.empty() && text.back() == ' ') text.pop_back();
            out.push_back(text + " [" + std::to_string(sig->signature.size()) + "-byte signature]");
        } else {
            out.push_back(to_text(rr));
        }
    }
    return out;
}

Question probe_question(const AttackScenario& scenario) {
    if (scenario.forged_records.empty())
        throw MutationError(MutationErrc::InvalidScenario, "scenario " + scenario.id + " names no forged record to probe for");
    return Question{scenario.forged_records.front().name, scenario.forged_records.front().type, rrclass::IN};
}

ProbeOutcome run_in_process(const AttackScenario& scenario, PolicyName policy_name, const Fixture& fixture,
                            const RunOptions& options) {
    ProbeOutcome out;
    const Question question = probe_question(scenario);
    auto authority = serve(Endpoint{"127.0.0.1", 0}, fixture.tree);
    ProxyOptions proxy_options;
    proxy_options.context.now = fixture.now;
    proxy_options.upstream_timeout = options.query_timeout;
    auto proxy = start_proxy(Endpoint{"127.0.0.1", 0}, authority->endpoint(), scenario.rules, proxy_options);

    ClientOptions client;
    client.timeout = options.query_timeout;
    const ValidatorPolicy policy{policy_name, fixture.description.profile};
    const ValidationResult result =
        validate_name(question, network_transport(proxy->endpoint(), client), fixture.anchor, policy, fixture.now);
    proxy->stop();
    authority->stop();

    const DnsMessage response = render_response(result, policy, make_query(0, question.name, question.type, true));
    auto& e = out.evidence;
    e.rcode = rcode_to_string(response.header.rcode);
    e.ad = response.header.ad;
    e.state = std::string(to_string(result.state));
    e.answer = answer_text(response.answers);
    e.forged_observed = forged_present(response.answers, scenario);
    e.downgraded_by_spec = result.downgraded_by_spec;
    e.policy_deviation = result.policy_deviation;
    for (const auto& step : result.trace) e.trace.push_back(step.to_string());

    if (result.state == SecurityState::Indeterminate) {
        out.classification = Classification::Error;
        out.error = result.trace.empty() ? "validation indeterminate" : result.trace.back().to_string();
    } else {
        out.classification = classify(result, scenario);
    }
    return out;
}

ProbeOutcome run_external(const AttackScenario& scenario, const ExternalTarget& target, const Fixture& fixture,
                          const RunOptions& options) {
    ProbeOutcome out;
    const Question question = probe_question(scenario);
    auto authority = serve(Endpoint{"127.0.0.1", 0}, fixture.tree);
    ProxyOptions proxy_options;
    proxy_options.context.now = fixture.now;
    proxy_options.upstream_timeout = options.query_timeout;
    auto proxy = start_proxy(target.proxy_listen, authority->endpoint(), scenario.rules, proxy_options);

    ClientOptions client;
    client.timeout = options.query_timeout;
    const DnsMessage response = exchange(target.resolver, make_query(0x5a5a, question.name, question.type, true, true), client);
    auto& e = out.evidence;
    e.rcode = rcode_to_string(response.header.rcode);
    e.ad = response.header.ad;
    e.answer = answer_text(response.answers);
    e.forged_observed = forged_present(response.answers, scenario);
    out.classification = classify_response(response, scenario);
    return out;
}

}  // namespace

ProbeOutcome run_scenario(const AttackScenario& scenario, const ProbeTarget& target, const Fixture& fixture,
                          const RunOptions& options) {
    if (const auto* external = std::get_if<ExternalTarget>(&target)) check_external_allowed(external->resolver, options.gate);
    ProbeOutcome out;
    try {
        if (const auto* in = std::get_if<InProcessTarget>(&target)) out = run_in_process(scenario, in->policy, fixture, options);
        else out = run_external(scenario, std::get<ExternalTarget>(target), fixture, options);
    } catch (const std::exception& e) {
        out = ProbeOutcome{};
        out.classification = Classification::Error;
        out.error = e.what();
    }
    out.scenario = scenario.id;
    out.target = target_label(target);
    return out;
}

// --- matrix ------------------------------------------------------------------------

namespace {

std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

constexpr std::array<Classification, 4> kClassifications = {Classification::Vulnerable, Classification::Compliant,
                                                             Classification::DowngradedBySpec, Classification::Error};

}  // namespace

std::vector<AttackScenario> default_scenarios(const Fixture& fixture) {
    std::vector<AttackScenario> out;
    for (const auto id : kAllScenarios) out.push_back(make_scenario(id, fixture.description));
    return out;
}

std::vector<ProbeTarget> default_targets() {
    std::vector<ProbeTarget> out;
    for (const auto p : kAllPolicies) out.push_back(InProcessTarget{p});
    return out;
}

MatrixReport run_matrix(std::span<const AttackScenario> scenarios, std::span<const ProbeTarget> targets,
                        const Fixture& fixture, const RunOptions& options) {
    if (scenarios.empty() || targets.empty())
        throw HarnessError(HarnessErrc::InvalidTarget, "a matrix needs at least one scenario and one target");
    for (const auto& t : targets)
        if (const auto* external = std::get_if<ExternalTarget>(&t)) check_external_allowed(external->resolver, options.gate);

    MatrixReport report;
    report.metadata = ReportMetadata{fixture.hash(), utc_timestamp(), fixture.seed, fixture.now,
                                     fixture.description.profile.to_string()};
    for (const auto& s : scenarios) report.scenarios.push_back(s.id);
    for (const auto& t : targets) report.targets.push_back(target_label(t));
    report.cells.resize(scenarios.size() * targets.size());

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < report.cells.size(); i = next++)
            report.cells[i] = run_scenario(scenarios[i % scenarios.size()], targets[i / scenarios.size()], fixture, options);
    };
    const unsigned jobs = std::clamp<unsigned>(options.jobs, 1, static_cast<unsigned>(report.cells.size()));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return report;
}

const ProbeOutcome& MatrixReport::cell(std::string_view target, std::string_view scenario) const {
    const auto t = std::find(targets.begin(), targets.end(), target);
    const auto s = std::find(scenarios.begin(), scenarios.end(), scenario);
    if (t == targets.end() || s == scenarios.end())
        throw HarnessError(HarnessErrc::InvalidTarget, "no cell " + std::string(target) + " x " + std::string(scenario));
    return cells.at(static_cast<std::size_t>(t - targets.begin()) * scenarios.size() +
                    static_cast<std::size_t>(s - scenarios.begin()));
}

std::map<std::string, std::size_t> MatrixReport::summary() const {
    std::map<std::string, std::size_t> out;
    for (const auto c : kClassifications) out[std::string(to_string(c))] = 0;
    for (const auto& cell : cells) ++out[std::string(to_string(cell.classification))];
    return out;
}

bool MatrixReport::any(Classification c) const {
    return std::any_of(cells.begin(), cells.end(), [&](const ProbeOutcome& o) { return o.classification == c; });
}

std::string MatrixReport::to_json() const {
    json cells_json = json::array();
    for (const auto& c : cells) {
        const auto& e = c.evidence;
        cells_json.push_back({{"scenario", c.scenario},
                              {"target", c.target},
                              {"classification", std::string(to_string(c.classification))},
                              {"error", c.error},
                              {"evidence",
                               {{"rcode", e.rcode},
                                {"ad", e.ad},
                                {"state", e.state},
                                {"answer", e.answer},
                                {"forged_observed", e.forged_observed},
                                {"downgraded_by_spec", e.downgraded_by_spec},
                                {"policy_deviation", e.policy_deviation},
                                {"trace", e.trace}}}});
    }
    json j{{"schema", "agility.matrix"},
           {"version", kSchemaVersion},
           {"metadata",
            {{"fixture_hash", metadata.fixture_hash},
             {"timestamp", metadata.timestamp},
             {"seed", metadata.seed},
             {"now", metadata.now},
             {"supported_algorithms", metadata.supported_algorithms}}},
           {"scenarios", scenarios},
           {"targets", targets},
           {"cells", cells_json},
           {"summary", summary()}};
    return j.dump(2) + "\n";
}

MatrixReport MatrixReport::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("schema") != "agility.matrix" || j.at("version") != kSchemaVersion)
            throw HarnessError(HarnessErrc::InvalidReport, "unsupported report schema or version");
        MatrixReport r;
        const auto& m = j.at("metadata");
        r.metadata = ReportMetadata{m.at("fixture_hash"), m.at("timestamp"), m.at("seed"), m.at("now"),
                                    m.at("supported_algorithms")};
        r.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        r.targets = j.at("targets").get<std::vector<std::string>>();
        for (const auto& c : j.at("cells")) {
            ProbeOutcome o;
            o.scenario = c.at("scenario");
            o.target = c.at("target");
            const auto cls = classification_from_string(c.at("classification").get<std::string>());
            if (!cls) throw HarnessError(HarnessErrc::InvalidReport, "unknown classification in cell");
            o.classification = *cls;
            o.error = c.value("error", "");
            const auto& e = c.at("evidence");
            o.evidence = Evidence{e.at("rcode"),  e.at("ad"), e.at("state"), e.at("answer").get<std::vector<std::string>>(),
                                  e.at("forged_observed"), e.at("downgraded_by_spec"), e.at("policy_deviation"),
                                  e.at("trace").get<std::vector<std::string>>()};
            r.cells.push_back(std::move(o));
        }
        if (r.cells.size() != r.scenarios.size() * r.targets.size())
            throw HarnessError(HarnessErrc::InvalidReport, "grid is incomplete");
        return r;
    } catch (const json::exception& e) {
        throw HarnessError(HarnessErrc::InvalidReport, e.what());
    }
}

std::string MatrixReport::to_table() const {
    std::size_t label_width = 8;
    for (const auto& t : targets) label_width = std::max(label_width, t.size() + 2);
    constexpr int kCell = 18;
    std::ostringstream out;
    out << "fixture " << metadata.fixture_hash.substr(0, 12) << "  algorithms " << metadata.supported_algorithms
        << "  now " << metadata.now << "\n\n";
    out << std::left << std::setw(static_cast<int>(label_width)) << "target";
    for (const auto& s : scenarios) out << std::setw(kCell) << s;
    out << "\n";
    for (const auto& t : targets) {
        out << std::setw(static_cast<int>(label_width)) << t;
        for (const auto& s : scenarios) out << std::setw(kCell) << to_string(cell(t, s).classification);
        out << "\n";
    }
    out << "\nLegend:\n"
        << "  Vulnerable        the client received forged data\n"
        << "  Compliant         SERVFAIL, or authentic data with correct AD semantics\n"
        << "  DowngradedBySpec  accepted unvalidated because no DS algorithm is supported, as the standard allows\n"
        << "  Error             the cell could not run (see error text in the structured report)\n\nSummary:";
    for (const auto& [name, count] : summary()) out << " " << name << "=" << count;
    out << "\n";
    return out.str();
}

}  // namespace agility
