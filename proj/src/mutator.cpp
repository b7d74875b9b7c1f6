#include "agility/mutator.hpp"

#include <algorithm>
#include <json.hpp>

#include "agility/errors.hpp"
#include "agility/text.hpp"

namespace agility {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint32_t kResignBackdate = 3600;
constexpr std::uint32_t kResignValidity = 7 * 86400;

bool type_in(const std::vector<std::uint16_t>& filter, std::uint16_t type) {
    return filter.empty() || std::find(filter.begin(), filter.end(), type) != filter.end();
}

std::uint16_t effective_type(const ResourceRecord& rr) {
    if (rr.type == rrtype::RRSIG)
        if (const auto* sig = rr.as<Rrsig>()) return sig->type_covered;
    return rr.type;
}

bool targeted(const MatchSpec& match, const ResourceRecord& rr) {
    if (!rr.name.is_subdomain_of(match.suffix)) return false;
    return type_in(match.rrtypes, effective_type(rr)) || (rr.type == rrtype::RRSIG && type_in(match.rrtypes, rrtype::RRSIG));
}

std::vector<Section> sections_of(const MatchSpec& match) {
    if (match.section) return {*match.section};
    return {Section::Answer, Section::Authority, Section::Additional};
}

/// Replaces the RRSIGs over (owner, type) in `records` with one by `resign`.
void resign_rrset(std::vector<ResourceRecord>& records, const DnsName& owner, std::uint16_t type, const Resign& resign,
                  const MutationContext& context) {
    std::erase_if(records, [&](const ResourceRecord& rr) {
        return rr.type == rrtype::RRSIG && rr.name == owner && effective_type(rr) == type;
    });
    std::vector<ResourceRecord> rrset;
    std::size_t last = 0;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].name == owner && records[i].type == type) {
            rrset.push_back(records[i]);
            last = i;
        }
    if (rrset.empty()) return;
    const auto meta = signature_meta(rrset.front(), resign.key.dnskey(), resign.signer,
                                     context.now - kResignBackdate, context.now + kResignValidity);
    const Rrsig sig = sign_rrset(rrset, meta, resign.key);
    records.insert(records.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                   ResourceRecord::make(rrset.front().name, rrset.front().ttl, sig));
}

/// Shared shape of the DS rewrites: transform each targeted DS into zero or
/// more replacements, then optionally re-sign the touched RRsets.
template <typename Transform>
void rewrite_ds(DnsMessage& msg, const MatchSpec& match, const std::optional<Resign>& resign,
                const MutationContext& context, Transform transform) {
    if (!type_in(match.rrtypes, rrtype::DS)) return;
    for (const Section s : sections_of(match)) {
        auto& records = msg.section(s);
        std::vector<ResourceRecord> out;
        std::vector<DnsName> owners;
        for (const auto& rr : records) {
            if (rr.type != rrtype::DS || !targeted(match, rr) || !rr.as<Ds>()) {
                out.push_back(rr);
                continue;
            }
            for (Ds& ds : transform(*rr.as<Ds>())) out.push_back(ResourceRecord::make(rr.name, rr.ttl, std::move(ds)));
            if (std::find(owners.begin(), owners.end(), rr.name) == owners.end()) owners.push_back(rr.name);
        }
        records = std::move(out);
        if (resign)
            for (const auto& owner : owners) resign_rrset(records, owner, rrtype::DS, *resign, context);
    }
}

struct Applier {
    DnsMessage& msg;
    const MatchSpec& match;
    const MutationContext& context;

    void operator()(const action::RewriteRrsigAlg& a) const {
        for (const Section s : sections_of(match))
            for (auto& rr : msg.section(s))
                if (auto* sig = rr.as<Rrsig>(); sig && targeted(match, rr) && (!a.from || sig->algorithm == *a.from))
                    sig->algorithm = a.to;
    }

    void operator()(const action::RewriteDnskeyAlg& a) const {
        if (!type_in(match.rrtypes, rrtype::DNSKEY)) return;
        for (const Section s : sections_of(match))
            for (auto& rr : msg.section(s))
                if (auto* key = rr.as<Dnskey>(); key && targeted(match, rr) && (!a.from || key->algorithm == *a.from))
                    key->algorithm = a.to;
    }

    void operator()(const action::RewriteDsAlg& a) const {
        rewrite_ds(msg, match, a.resign, context, [&](const Ds& ds) {
            std::vector<Ds> out;
            for (const auto alg : a.to) {
                Ds copy = ds;
                copy.algorithm = alg;
                out.push_back(std::move(copy));
            }
            return out;
        });
    }

    void operator()(const action::RewriteDsDigestType& a) const {
        rewrite_ds(msg, match, a.resign, context, [&](const Ds& ds) {
            Ds copy = ds;
            copy.digest_type = a.to;
            return std::vector<Ds>{copy};
        });
    }

    void operator()(const action::RewriteDsKeyTag& a) const {
        rewrite_ds(msg, match, a.resign, context, [&](const Ds& ds) {
            Ds copy = ds;
            copy.key_tag = a.to;
            return std::vector<Ds>{copy};
        });
    }

    void operator()(const action::InjectRecord& a) const {
        auto& records = msg.section(match.section.value_or(Section::Answer));
        auto position = records.end();
        if (a.replace_existing) {
            const auto same = [&](const ResourceRecord& rr) { return rr.name == a.record.name && rr.type == a.record.type; };
            const auto first = std::find_if(records.begin(), records.end(), same);
            const auto index = first - records.begin();
            std::erase_if(records, same);
            position = records.begin() + std::min<std::ptrdiff_t>(index, static_cast<std::ptrdiff_t>(records.size()));
        }
        records.insert(position, a.record);
    }

    void operator()(const action::ReplaceDnskeyRrset& a) const {
        for (const Section s : sections_of(match)) {
            auto& records = msg.section(s);
            if (type_in(match.rrtypes, rrtype::DNSKEY)) {
                std::vector<ResourceRecord> out;
                std::vector<DnsName> replaced;
                for (const auto& rr : records) {
                    if (rr.type != rrtype::DNSKEY || !targeted(match, rr)) {
                        out.push_back(rr);
                        continue;
                    }
                    if (std::find(replaced.begin(), replaced.end(), rr.name) != replaced.end()) continue;
                    replaced.push_back(rr.name);
                    for (const auto& key : a.keys) out.push_back(ResourceRecord::make(rr.name, rr.ttl, key));
                }
                records = std::move(out);
            }
            if (!a.resign) continue;
            std::vector<std::pair<DnsName, std::uint16_t>> rrsets;
            for (const auto& rr : records) {
                if (rr.type == rrtype::RRSIG || !targeted(match, rr)) continue;
                const std::pair key{rr.name, rr.type};
                if (std::find(rrsets.begin(), rrsets.end(), key) == rrsets.end()) rrsets.push_back(key);
            }
            for (const auto& [owner, type] : rrsets) resign_rrset(records, owner, type, *a.resign, context);
        }
    }

    void operator()(const action::StripRrsigs& a) const {
        for (const Section s : sections_of(match))
            std::erase_if(msg.section(s), [&](const ResourceRecord& rr) {
                const auto* sig = rr.as<Rrsig>();
                if (!sig || !targeted(match, rr)) return false;
                return a.algorithms.empty() ||
                       std::find(a.algorithms.begin(), a.algorithms.end(), sig->algorithm) != a.algorithms.end();
            });
    }
};

std::string alg_list(const std::vector<std::uint8_t>& algs) {
    std::string out;
    for (const auto a : algs) out += (out.empty() ? "" : ",") + std::to_string(a);
    return out;
}

}  // namespace

bool rule_applies(const MutationRule& rule, const DnsMessage& msg) {
    return std::any_of(msg.questions.begin(), msg.questions.end(), [&](const Question& q) {
        return q.name.is_subdomain_of(rule.match.suffix) && type_in(rule.match.rrtypes, q.type);
    });
}

DnsMessage apply_rules(const DnsMessage& msg, std::span<const MutationRule> rules, const MutationContext& context) {
    DnsMessage out = msg;
    for (const auto& rule : rules) {
        if (!rule_applies(rule, out)) continue;
        const DnsMessage before = rule.required ? out : DnsMessage{};
        std::visit(Applier{out, rule.match, context}, rule.action);
        if (rule.required && before == out)
            throw MutationError(MutationErrc::RuleTargetAbsent, rule.describe() + " changed nothing");
    }
    return out;
}

std::string MutationRule::describe() const {
    std::string types;
    for (const auto t : match.rrtypes) types += (types.empty() ? "" : ",") + type_to_string(t);
    std::string where = match.suffix.to_string() + "/" + (types.empty() ? "*" : types);
    if (match.section)
        where += *match.section == Section::Answer      ? "/answer"
                 : *match.section == Section::Authority ? "/authority"
                                                        : "/additional";
    struct Namer {
        std::string operator()(const action::RewriteRrsigAlg& a) const {
            return "RewriteRrsigAlg(" + (a.from ? std::to_string(*a.from) + "->" : std::string()) + std::to_string(a.to) + ")";
        }
        std::string operator()(const action::RewriteDnskeyAlg& a) const {
            return "RewriteDnskeyAlg(" + (a.from ? std::to_string(*a.from) + "->" : std::string()) + std::to_string(a.to) + ")";
        }
        std::string operator()(const action::RewriteDsAlg& a) const {
            return "RewriteDsAlg(" + alg_list(a.to) + (a.resign ? ", resigned" : "") + ")";
        }
        std::string operator()(const action::RewriteDsDigestType& a) const {
            return "RewriteDsDigestType(" + std::to_string(a.to) + ")";
        }
        std::string operator()(const action::RewriteDsKeyTag& a) const { return "RewriteDsKeyTag(" + std::to_string(a.to) + ")"; }
        std::string operator()(const action::InjectRecord& a) const {
            return std::string(a.replace_existing ? "InjectRecord(replace " : "InjectRecord(add ") + to_text(a.record) + ")";
        }
        std::string operator()(const action::ReplaceDnskeyRrset& a) const {
            return "ReplaceDnskeyRrset(" + std::to_string(a.keys.size()) + " keys" +
                   (a.resign ? ", resigned by " + std::to_string(a.resign->key.key_tag()) : "") + ")";
        }
        std::string operator()(const action::StripRrsigs& a) const {
            return "StripRrsigs(" + (a.algorithms.empty() ? std::string("all") : alg_list(a.algorithms)) + ")";
        }
    };
    return std::visit(Namer{}, action) + " on " + where;
}

// --- scenarios ---------------------------------------------------------------------

std::string_view to_string(Classification c) noexcept {
    switch (c) {
        case Classification::Vulnerable: return "Vulnerable";
        case Classification::Compliant: return "Compliant";
        case Classification::DowngradedBySpec: return "DowngradedBySpec";
        case Classification::Error: return "Error";
    }
    return "?";
}

std::optional<Classification> classification_from_string(std::string_view text) noexcept {
    for (const auto c : {Classification::Vulnerable, Classification::Compliant, Classification::DowngradedBySpec,
                         Classification::Error})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

std::string_view to_string(ScenarioId id) noexcept {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
        case ScenarioId::S4: return "S4";
        case ScenarioId::S5: return "S5";
    }
    return "?";
}

ScenarioId scenario_from_string(std::string_view text) {
    for (const auto id : kAllScenarios) {
        const auto name = to_string(id);
        if (text.size() == name.size() && ascii_lower(text[0]) == 's' && text[1] == name[1]) return id;
    }
    throw MutationError(MutationErrc::InvalidScenario, "unknown scenario '" + std::string(text) + "' (expected S1..S5)");
}

namespace {

[[noreturn]] void mismatch(ScenarioId id, const std::string& what) {
    throw MutationError(MutationErrc::FixtureMismatch, std::string(to_string(id)) + ": " + what);
}

MatchSpec match(const DnsName& suffix, std::vector<std::uint16_t> types, std::optional<Section> section) {
    return MatchSpec{suffix, std::move(types), section};
}

Resign parent_resign(ScenarioId id, const FixtureDescription& f) {
    if (!f.parent_zsk) mismatch(id, "fixture has no parent ZSK to re-sign the DS RRset");
    return Resign{*f.parent_zsk, f.parent_zone};
}

}  // namespace

AttackScenario make_scenario(ScenarioId id, const FixtureDescription& f) {
    AttackScenario s;
    s.id = std::string(to_string(id));
    const bool victim_signed = !f.victim_algorithms.empty();
    if (id != ScenarioId::S4 && !victim_signed) mismatch(id, "fixture has no signed victim zone");

    const DnsName& target = id == ScenarioId::S4 ? f.multi_target : f.victim_target;
    const ResourceRecord fake = ResourceRecord::make(target, f.target_ttl, ARdata{f.attacker_address});
    s.forged_records = {fake};
    const MutationRule inject{match(target, {rrtype::A}, Section::Answer), action::InjectRecord{fake, true}, false};

    switch (id) {
        case ScenarioId::S1:
            s.description = "RRSIG over the answer rewritten to an unknown algorithm, fake A injected";
            s.rules = {{match(target, {rrtype::A}, Section::Answer), action::RewriteRrsigAlg{kDefaultUnknownAlgorithm, {}}, true},
                       inject};
            s.expected_strict = Classification::Compliant;
            s.expected_vulnerable_policy = "v1-unknown-rrsig";
            break;
        case ScenarioId::S2: {
            s.description = "child DS RRset rewritten to algorithms 15 and 16, fake A injected";
            const std::vector<std::uint8_t> to{algorithm::ED25519, algorithm::ED448};
            s.rules = {{match(f.victim_zone, {rrtype::DS}, Section::Answer), action::RewriteDsAlg{to, parent_resign(id, f)}, true},
                       inject};
            const bool any_supported = std::any_of(to.begin(), to.end(), [&](auto a) { return f.profile.supports(a); });
            s.expected_strict = any_supported ? Classification::Compliant : Classification::DowngradedBySpec;
            s.expected_vulnerable_policy = "v2-unknown-ds";
            break;
        }
        case ScenarioId::S3: {
            s.description = "child DS algorithm rewritten to a supported algorithm no child key uses, fake A injected";
            std::optional<std::uint8_t> other;
            for (const auto alg : f.profile.algorithms())
                if (!f.victim_algorithms.count(alg)) {
                    other = alg;
                    break;
                }
            if (!other) mismatch(id, "every supported algorithm is already used by the victim zone");
            s.rules = {{match(f.victim_zone, {rrtype::DS}, Section::Answer),
                        action::RewriteDsAlg{{*other}, parent_resign(id, f)}, true},
                       inject};
            s.expected_strict = Classification::Compliant;
            s.expected_vulnerable_policy = "v4-mismatch-skip";
            break;
        }
        case ScenarioId::S4: {
            if (f.multi_algorithms.size() < 2) mismatch(id, "fixture has no zone signed with two algorithms");
            s.description = "two-algorithm zone: one algorithm's RRSIGs stripped, the other's rewritten to unknown, fake A injected";
            const std::uint8_t kept = *f.multi_algorithms.rbegin();
            std::vector<std::uint8_t> stripped(f.multi_algorithms.begin(), std::prev(f.multi_algorithms.end()));
            s.rules = {{match(target, {rrtype::A}, Section::Answer), action::StripRrsigs{stripped}, true},
                       {match(target, {rrtype::A}, Section::Answer), action::RewriteRrsigAlg{kDefaultUnknownAlgorithm, kept}, true},
                       inject};
            s.expected_strict = Classification::Compliant;
            s.expected_vulnerable_policy = "v3-bogus-passthrough";
            break;
        }
        case ScenarioId::S5: {
            if (!f.attacker_key) mismatch(id, "fixture has no attacker key");
            s.description = "DNSKEY RRset replaced by an attacker key that re-signs the forged A; DS rewritten to unknown";
            const Resign attacker{*f.attacker_key, f.victim_zone};
            s.rules = {{match(f.victim_zone, {rrtype::DS}, Section::Answer),
                        action::RewriteDsAlg{{kDefaultUnknownAlgorithm}, parent_resign(id, f)}, true},
                       inject,
                       {match(f.victim_zone, {rrtype::DNSKEY, rrtype::A}, Section::Answer),
                        action::ReplaceDnskeyRrset{{f.attacker_key->dnskey()}, attacker}, false}};
            s.expected_strict = Classification::DowngradedBySpec;
            s.expected_vulnerable_policy = "v2-unknown-ds";
            s.attacker_key_tag = f.attacker_key->key_tag();
            break;
        }
    }
    return s;
}

// --- scenario files ----------------------------------------------------------------

namespace {

[[noreturn]] void bad_scenario(const std::string& what) { throw MutationError(MutationErrc::InvalidScenario, what); }

std::string section_name(Section s) {
    switch (s) {
        case Section::Answer: return "answer";
        case Section::Authority: return "authority";
        case Section::Additional: return "additional";
    }
    return "answer";
}

Section section_from(const std::string& text) {
    if (text == "answer") return Section::Answer;
    if (text == "authority") return Section::Authority;
    if (text == "additional") return Section::Additional;
    bad_scenario("unknown section '" + text + "'");
}

std::uint16_t type_from(const std::string& text) {
    const auto t = type_from_string(text);
    if (!t) bad_scenario("unknown record type '" + text + "'");
    return *t;
}

json record_to_json(const ResourceRecord& rr) {
    return {{"owner", rr.name.to_string()}, {"type", type_to_string(rr.type)}, {"ttl", rr.ttl}, {"data", rdata_to_text(rr)}};
}

ResourceRecord record_from_json(const json& j) {
    const auto type = type_from(j.at("type").get<std::string>());
    return ResourceRecord{DnsName::parse(j.at("owner").get<std::string>()), type, rrclass::IN,
                          j.value("ttl", std::uint32_t{300}), parse_rdata(type, j.at("data").get<std::string>())};
}

json resign_to_json(const std::optional<Resign>& r) {
    if (!r) return nullptr;
    return {{"signer", r->signer.to_string()}, {"key", json::parse(r->key.to_json())}};
}

std::optional<Resign> resign_from_json(const json& j) {
    if (!j.contains("resign") || j["resign"].is_null()) return std::nullopt;
    const auto& r = j["resign"];
    return Resign{KeyPair::from_json(r.at("key").dump()), DnsName::parse(r.at("signer").get<std::string>())};
}

json rule_to_json(const MutationRule& rule) {
    json m{{"suffix", rule.match.suffix.to_string()}, {"rrtypes", json::array()}};
    for (const auto t : rule.match.rrtypes) m["rrtypes"].push_back(type_to_string(t));
    if (rule.match.section) m["section"] = section_name(*rule.match.section);

    struct ToJson {
        json operator()(const action::RewriteRrsigAlg& a) const {
            json j{{"type", "rewrite_rrsig_alg"}, {"to", a.to}};
            if (a.from) j["from"] = *a.from;
            return j;
        }
        json operator()(const action::RewriteDnskeyAlg& a) const {
            json j{{"type", "rewrite_dnskey_alg"}, {"to", a.to}};
            if (a.from) j["from"] = *a.from;
            return j;
        }
        json operator()(const action::RewriteDsAlg& a) const {
            return {{"type", "rewrite_ds_alg"}, {"to", a.to}, {"resign", resign_to_json(a.resign)}};
        }
        json operator()(const action::RewriteDsDigestType& a) const {
            return {{"type", "rewrite_ds_digest_type"}, {"to", a.to}, {"resign", resign_to_json(a.resign)}};
        }
        json operator()(const action::RewriteDsKeyTag& a) const {
            return {{"type", "rewrite_ds_key_tag"}, {"to", a.to}, {"resign", resign_to_json(a.resign)}};
        }
        json operator()(const action::InjectRecord& a) const {
            return {{"type", "inject_record"}, {"record", record_to_json(a.record)}, {"replace_existing", a.replace_existing}};
        }
        json operator()(const action::ReplaceDnskeyRrset& a) const {
            json keys = json::array();
            for (const auto& k : a.keys) keys.push_back(rdata_to_text(ResourceRecord::make(DnsName{}, 0, k)));
            return {{"type", "replace_dnskey_rrset"}, {"keys", keys}, {"resign", resign_to_json(a.resign)}};
        }
        json operator()(const action::StripRrsigs& a) const {
            return {{"type", "strip_rrsigs"}, {"algorithms", a.algorithms}};
        }
    };
    return {{"match", m}, {"action", std::visit(ToJson{}, rule.action)}, {"required", rule.required}};
}

MutationRule rule_from_json(const json& j) {
    MutationRule rule;
    const auto& m = j.at("match");
    rule.match.suffix = DnsName::parse(m.at("suffix").get<std::string>());
    for (const auto& t : m.value("rrtypes", json::array())) rule.match.rrtypes.push_back(type_from(t.get<std::string>()));
    if (m.contains("section") && !m["section"].is_null()) rule.match.section = section_from(m["section"].get<std::string>());
    rule.required = j.value("required", false);

    const auto& a = j.at("action");
    const auto type = a.at("type").get<std::string>();
    auto from = [&]() -> std::optional<std::uint8_t> {
        if (a.contains("from") && !a["from"].is_null()) return a["from"].get<std::uint8_t>();
        return std::nullopt;
    };
    if (type == "rewrite_rrsig_alg") rule.action = action::RewriteRrsigAlg{a.at("to").get<std::uint8_t>(), from()};
    else if (type == "rewrite_dnskey_alg") rule.action = action::RewriteDnskeyAlg{a.at("to").get<std::uint8_t>(), from()};
    else if (type == "rewrite_ds_alg") {
        const auto& to = a.at("to");
        std::vector<std::uint8_t> algs = to.is_array() ? to.get<std::vector<std::uint8_t>>() : std::vector{to.get<std::uint8_t>()};
        rule.action = action::RewriteDsAlg{algs, resign_from_json(a)};
    } else if (type == "rewrite_ds_digest_type")
        rule.action = action::RewriteDsDigestType{a.at("to").get<std::uint8_t>(), resign_from_json(a)};
    else if (type == "rewrite_ds_key_tag")
        rule.action = action::RewriteDsKeyTag{a.at("to").get<std::uint16_t>(), resign_from_json(a)};
    else if (type == "inject_record")
        rule.action = action::InjectRecord{record_from_json(a.at("record")), a.value("replace_existing", true)};
    else if (type == "replace_dnskey_rrset") {
        action::ReplaceDnskeyRrset r;
        for (const auto& k : a.at("keys")) r.keys.push_back(std::get<Dnskey>(parse_rdata(rrtype::DNSKEY, k.get<std::string>())));
        r.resign = resign_from_json(a);
        rule.action = std::move(r);
    } else if (type == "strip_rrsigs")
        rule.action = action::StripRrsigs{a.value("algorithms", std::vector<std::uint8_t>{})};
    else
        bad_scenario("unknown action type '" + type + "'");
    return rule;
}

json scenario_to_json(const AttackScenario& s) {
    json j{{"id", s.id},
           {"description", s.description},
           {"expected_strict", std::string(to_string(s.expected_strict))},
           {"expected_vulnerable_policy", s.expected_vulnerable_policy},
           {"rules", json::array()},
           {"forged_records", json::array()}};
    for (const auto& r : s.rules) j["rules"].push_back(rule_to_json(r));
    for (const auto& r : s.forged_records) j["forged_records"].push_back(record_to_json(r));
    if (s.attacker_key_tag) j["attacker_key_tag"] = *s.attacker_key_tag;
    return j;
}

AttackScenario scenario_from(const json& j) {
    AttackScenario s;
    s.id = j.at("id").get<std::string>();
    s.description = j.value("description", "");
    const auto strict = classification_from_string(j.value("expected_strict", "Compliant"));
    if (!strict) bad_scenario("bad expected_strict in scenario " + s.id);
    s.expected_strict = *strict;
    s.expected_vulnerable_policy = j.value("expected_vulnerable_policy", "");
    for (const auto& r : j.at("rules")) s.rules.push_back(rule_from_json(r));
    for (const auto& r : j.value("forged_records", json::array())) s.forged_records.push_back(record_from_json(r));
    if (j.contains("attacker_key_tag") && !j["attacker_key_tag"].is_null())
        s.attacker_key_tag = j["attacker_key_tag"].get<std::uint16_t>();
    return s;
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        bad_scenario(e.what());
    } catch (const WireError& e) {
        bad_scenario(e.what());
    } catch (const DnssecError& e) {
        bad_scenario(e.what());
    } catch (const std::invalid_argument& e) {
        bad_scenario(e.what());
    }
}

}  // namespace

std::string AttackScenario::to_json() const { return scenario_to_json(*this).dump(2); }

AttackScenario AttackScenario::from_json(std::string_view text) {
    return guarded([&] { return scenario_from(json::parse(text)); });
}

std::string scenarios_to_json(std::span<const AttackScenario> scenarios) {
    json j{{"scenarios", json::array()}};
    for (const auto& s : scenarios) j["scenarios"].push_back(scenario_to_json(s));
    return j.dump(2);
}

std::vector<AttackScenario> scenarios_from_json(std::string_view text) {
    return guarded([&] {
        const json j = json::parse(text);
        std::vector<AttackScenario> out;
        for (const auto& s : j.at("scenarios")) out.push_back(scenario_from(s));
        return out;
    });
}

// --- proxy -------------------------------------------------------------------------

RequestHandler proxy_handler(Endpoint upstream, std::vector<MutationRule> rules, ProxyOptions options) {
    return [upstream = std::move(upstream), rules = std::move(rules), options](
               std::span<const std::uint8_t> request, Transport transport) -> std::optional<Bytes> {
        Bytes reply;
        try {
            reply = exchange_raw(upstream, request, transport, options.upstream_timeout);
        } catch (const NetError&) {
            if (!options.servfail_on_timeout) return std::nullopt;
            try {
                DnsMessage failure = decode_message(request);
                failure.header.qr = true;
                failure.header.rcode = rcode::ServFail;
                failure.answers.clear();
                failure.authority.clear();
                failure.additional.clear();
                return encode_message(failure);
            } catch (const WireError&) {
                return std::nullopt;
            }
        }
        if (rules.empty()) return reply;

        DnsMessage response;
        try {
            response = decode_message(reply);
        } catch (const WireError&) {
            return reply;
        }
        DnsMessage mutated;
        try {
            mutated = apply_rules(response, rules, options.context);
        } catch (const std::exception&) {
            return reply;
        }
        if (mutated == response) return reply;

        EncodeOptions encode;
        if (transport == Transport::Udp) {
            encode.allow_truncation = true;
            encode.max_size = 512;
            try {
                encode.max_size = udp_limit_for(decode_message(request));
            } catch (const WireError&) {
            }
        }
        return encode_message(mutated, encode);
    };
}

std::unique_ptr<DnsListener> start_proxy(const Endpoint& listen, const Endpoint& upstream, std::vector<MutationRule> rules,
                                         const ProxyOptions& options) {
    return DnsListener::start(listen, proxy_handler(upstream, std::move(rules), options), options.listener);
}

}  // namespace agility
