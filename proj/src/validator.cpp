#include "agility/validator.hpp"

#include <algorithm>
#include <set>

#include "agility/errors.hpp"

namespace agility {

std::string_view to_string(SecurityState s) noexcept {
    switch (s) {
        case SecurityState::Secure: return "Secure";
        case SecurityState::Insecure: return "Insecure";
        case SecurityState::Bogus: return "Bogus";
        case SecurityState::Indeterminate: return "Indeterminate";
    }
    return "?";
}

std::string_view cli_name(PolicyName p) noexcept {
    switch (p) {
        case PolicyName::Strict: return "strict";
        case PolicyName::V1UnknownRrsigInsecure: return "v1-unknown-rrsig";
        case PolicyName::V2UnknownDsInsecure: return "v2-unknown-ds";
        case PolicyName::V3BogusPassthrough: return "v3-bogus-passthrough";
        case PolicyName::V4AnyUnsupportedSkips: return "v4-mismatch-skip";
    }
    return "?";
}

std::optional<PolicyName> policy_from_cli(std::string_view text) noexcept {
    for (const auto p : kAllPolicies)
        if (cli_name(p) == text) return p;
    return std::nullopt;
}

std::string_view to_string(BogusReason r) noexcept {
    return r == BogusReason::NoMatchingKey ? "NoMatchingKey" : "NoValidSignature";
}

std::string TraceStep::to_string() const { return zone.to_string() + " " + step + ": " + outcome; }

DsEvaluation evaluate_ds_set(std::span<const Ds> ds_rrset, const ValidatorPolicy& policy) {
    DsEvaluation out;
    if (ds_rrset.empty()) return out;
    for (const auto& ds : ds_rrset)
        if (classify_algorithm(ds.algorithm, policy.supported) == AlgorithmClass::Implemented &&
            policy.supported.supports_digest(ds.digest_type))
            out.supported.push_back(ds);
    out.kind = out.supported.empty() ? DsEvaluation::Kind::NoneSupported : DsEvaluation::Kind::SupportedSubset;
    return out;
}

namespace {

std::vector<ResourceRecord> rrset_of(const std::vector<ResourceRecord>& records, const DnsName& owner, std::uint16_t type) {
    std::vector<ResourceRecord> out;
    for (const auto& rr : records)
        if (rr.type == type && rr.name == owner) out.push_back(rr);
    return out;
}

std::vector<Rrsig> sigs_over(std::span<const ResourceRecord> records, const DnsName& owner, std::uint16_t type) {
    std::vector<Rrsig> out;
    for (const auto& rr : records)
        if (const auto* sig = rr.as<Rrsig>(); sig && rr.name == owner && sig->type_covered == type) out.push_back(*sig);
    return out;
}

template <typename Rdata>
std::vector<Rdata> rdata_of(const std::vector<ResourceRecord>& records) {
    std::vector<Rdata> out;
    for (const auto& rr : records)
        if (const auto* r = rr.as<Rdata>()) out.push_back(*r);
    return out;
}

std::set<std::uint8_t> algorithms_of(const std::vector<Rrsig>& sigs) {
    std::set<std::uint8_t> out;
    for (const auto& s : sigs) out.insert(s.algorithm);
    return out;
}

std::string alg_set(const std::set<std::uint8_t>& algs) {
    std::string out = "{";
    for (const auto a : algs) out += (out.size() > 1 ? "," : "") + std::to_string(a);
    return out + "}";
}

/// What the signatures over one RRset amount to under a set of trusted keys.
struct SignatureSummary {
    std::size_t valid = 0;
    /// Some RRSIG names an algorithm the policy does not implement.
    bool unimplemented = false;
    /// Some implemented RRSIG by a trusted key failed to verify.
    bool keyed_failure = false;
    std::string detail;
};

SignatureSummary check_signatures(std::span<const ResourceRecord> rrset, const std::vector<Rrsig>& sigs,
                                  const std::vector<Dnskey>& keys, std::uint32_t now, const ValidatorPolicy& policy) {
    SignatureSummary out;
    for (const auto& sig : sigs) {
        if (classify_algorithm(sig.algorithm, policy.supported) != AlgorithmClass::Implemented) {
            out.unimplemented = true;
            out.detail += " alg" + std::to_string(sig.algorithm) + "=unimplemented";
            continue;
        }
        std::optional<VerifyOutcome> best;
        for (const auto& key : keys) {
            if (key.algorithm != sig.algorithm || key_tag(key) != sig.key_tag) continue;
            const auto outcome = verify_rrsig(rrset, sig, key, now, policy.supported);
            if (!best || outcome == VerifyOutcome::Valid) best = outcome;
            if (outcome == VerifyOutcome::Valid) break;
        }
        if (!best) {
            out.detail += " tag" + std::to_string(sig.key_tag) + "=no-key";
            continue;
        }
        out.detail += " tag" + std::to_string(sig.key_tag) + "=" + std::string(to_string(*best));
        if (*best == VerifyOutcome::Valid) ++out.valid;
        else out.keyed_failure = true;
    }
    if (out.detail.empty()) out.detail = " no signatures";
    return out;
}

struct ZoneState {
    DnsName zone;
    SecurityState state = SecurityState::Insecure;
    std::vector<Dnskey> keys;
};

struct Cut {
    DnsName zone;
    DnsMessage ds;
    DnsMessage dnskey;
};

class Walk {
public:
    Walk(const Question& question, const TrustAnchor& anchor, const ValidatorPolicy& policy, std::uint32_t now,
         ValidationResult& result)
        : question_(question), anchor_(anchor), policy_(policy), now_(now), result_(result) {}

    void note(const DnsName& zone, std::string step, std::string outcome) {
        result_.trace.push_back({zone, std::move(step), std::move(outcome)});
    }

    ZoneState validate_anchor(const DnsMessage& response) {
        const auto rrset = rrset_of(response.answers, anchor_.zone, rrtype::DNSKEY);
        const auto sigs = sigs_over(response.answers, anchor_.zone, rrtype::DNSKEY);
        ZoneState out{anchor_.zone, SecurityState::Bogus, {}};
        if (!anchor_.keys.empty()) {
            const auto summary = check_signatures(rrset, sigs, anchor_.keys, now_, policy_);
            if (policy_.unknown_rrsig_insecure() && summary.unimplemented) {
                result_.policy_deviation = true;
                note(anchor_.zone, "anchor-dnskey", "Insecure (unimplemented RRSIG algorithm accepted unvalidated)");
                out.state = SecurityState::Insecure;
                return out;
            }
            if (summary.valid > 0) {
                out.state = SecurityState::Secure;
                out.keys = rdata_of<Dnskey>(rrset);
            }
            note(anchor_.zone, "anchor-dnskey", std::string(to_string(out.state)) + summary.detail);
            return out;
        }
        return link(anchor_.zone, anchor_.ds, rrset, response.answers);
    }

    /// Child zone state for one delegation, given the validated parent.
    ZoneState step(const ZoneState& parent, const Cut& cut, bool target_zone, const DnsMessage& target) {
        ZoneState out{cut.zone, SecurityState::Insecure, {}};
        if (parent.state != SecurityState::Secure) {
            out.state = parent.state;
            note(cut.zone, "delegation", "parent " + std::string(to_string(parent.state)));
            return out;
        }
        const auto ds_rrset = rrset_of(cut.ds.answers, cut.zone, rrtype::DS);
        const auto ds = rdata_of<Ds>(ds_rrset);
        const auto dnskey_rrset = rrset_of(cut.dnskey.answers, cut.zone, rrtype::DNSKEY);
        const auto dnskey_sigs = sigs_over(cut.dnskey.answers, cut.zone, rrtype::DNSKEY);

        if (policy_.mismatch_skips() && !ds.empty()) {
            std::set<std::uint8_t> ds_algs;
            for (const auto& d : ds) ds_algs.insert(d.algorithm);
            const auto key_algs = algorithms_of(dnskey_sigs);
            bool mismatch = ds_algs != key_algs;
            std::string detail = "DS " + alg_set(ds_algs) + " DNSKEY-RRSIG " + alg_set(key_algs);
            if (target_zone) {
                const auto target_algs = algorithms_of(sigs_over(target.answers, question_.name, question_.type));
                mismatch = mismatch || ds_algs != target_algs;
                detail += " target-RRSIG " + alg_set(target_algs);
            }
            if (mismatch) {
                result_.policy_deviation = true;
                note(cut.zone, "algorithm-match", "mismatch " + detail + ", validation skipped");
                return out;
            }
        }

        if (ds.empty()) {
            note(cut.zone, "ds-set", "empty, zone Insecure");
            return out;
        }

        const auto ds_summary = check_signatures(ds_rrset, sigs_over(cut.ds.answers, cut.zone, rrtype::DS), parent.keys, now_, policy_);
        if (policy_.unknown_rrsig_insecure() && ds_summary.unimplemented) {
            result_.policy_deviation = true;
            note(cut.zone, "ds-signatures", "unimplemented RRSIG algorithm, DS accepted unvalidated, zone Insecure");
            return out;
        }
        if (ds_summary.valid == 0 || ds_summary.keyed_failure) {
            out.state = SecurityState::Bogus;
            note(cut.zone, "ds-signatures", "Bogus" + ds_summary.detail);
            return out;
        }
        note(cut.zone, "ds-signatures", "Valid" + ds_summary.detail);

        if (policy_.unknown_ds_insecure()) {
            const auto unknown = std::find_if(ds.begin(), ds.end(), [&](const Ds& d) {
                return classify_algorithm(d.algorithm, policy_.supported) != AlgorithmClass::Implemented;
            });
            if (unknown != ds.end()) {
                result_.policy_deviation = true;
                note(cut.zone, "ds-set", "unimplemented DS algorithm " + std::to_string(unknown->algorithm) + ", zone Insecure");
                return out;
            }
        }

        const auto evaluation = evaluate_ds_set(ds, policy_);
        if (evaluation.kind == DsEvaluation::Kind::NoneSupported) {
            result_.downgraded_by_spec = true;
            note(cut.zone, "ds-set", "no supported algorithm, zone Insecure (downgraded by spec)");
            return out;
        }

        if (policy_.unknown_rrsig_insecure() &&
            std::any_of(dnskey_sigs.begin(), dnskey_sigs.end(), [&](const Rrsig& s) {
                return classify_algorithm(s.algorithm, policy_.supported) != AlgorithmClass::Implemented;
            })) {
            result_.policy_deviation = true;
            note(cut.zone, "dnskey-link", "unimplemented RRSIG algorithm, DNSKEY accepted unvalidated, zone Insecure");
            return out;
        }
        return link(cut.zone, evaluation.supported, dnskey_rrset, cut.dnskey.answers);
    }

    ZoneState link(const DnsName& zone, std::span<const Ds> supported, const std::vector<ResourceRecord>& dnskey_rrset,
                   const std::vector<ResourceRecord>& answers) {
        std::optional<BogusReason> reason;
        for (const auto& ds : supported) {
            const auto r = validate_dnskey_link(ds, zone, dnskey_rrset, answers, now_, policy_);
            if (r.state == SecurityState::Secure) {
                note(zone, "dnskey-link", "Secure via DS " + std::to_string(ds.key_tag) + "/" + std::to_string(ds.algorithm));
                return {zone, SecurityState::Secure, r.keys};
            }
            if (!reason || r.reason == BogusReason::NoValidSignature) reason = r.reason;
        }
        note(zone, "dnskey-link", "Bogus " + std::string(to_string(reason.value_or(BogusReason::NoMatchingKey))));
        return {zone, SecurityState::Bogus, {}};
    }

    SecurityState target(const ZoneState& zone, const DnsMessage& response) {
        if (zone.state != SecurityState::Secure) {
            note(zone.zone, "target", "zone " + std::string(to_string(zone.state)));
            return zone.state;
        }
        const auto rrset = rrset_of(response.answers, question_.name, question_.type);
        if (rrset.empty()) {
            note(zone.zone, "target", "no data, denial not validated, Insecure");
            return SecurityState::Insecure;
        }
        const auto summary =
            check_signatures(rrset, sigs_over(response.answers, question_.name, question_.type), zone.keys, now_, policy_);
        if (policy_.unknown_rrsig_insecure() && summary.unimplemented) {
            result_.policy_deviation = true;
            note(zone.zone, "target", "unimplemented RRSIG algorithm, answer accepted unvalidated, Insecure" + summary.detail);
            return SecurityState::Insecure;
        }
        const auto state = summary.valid > 0 ? SecurityState::Secure : SecurityState::Bogus;
        note(zone.zone, "target", std::string(to_string(state)) + summary.detail);
        return state;
    }

private:
    const Question& question_;
    const TrustAnchor& anchor_;
    const ValidatorPolicy& policy_;
    std::uint32_t now_;
    ValidationResult& result_;
};

bool answerable(std::uint8_t code) { return code == rcode::NoError || code == rcode::NxDomain; }

}  // namespace

LinkResult validate_dnskey_link(const Ds& ds, const DnsName& owner, std::span<const ResourceRecord> dnskey_rrset,
                                std::span<const ResourceRecord> rrsigs, std::uint32_t now, const ValidatorPolicy& policy) {
    LinkResult out;
    out.reason = BogusReason::NoMatchingKey;
    if (!policy.supported.supports(ds.algorithm) || !policy.supported.supports_digest(ds.digest_type)) return out;
    std::vector<ResourceRecord> rrset;
    for (const auto& rr : dnskey_rrset)
        if (rr.type == rrtype::DNSKEY && rr.name == owner) rrset.push_back(rr);
    const auto sigs = sigs_over(rrsigs, owner, rrtype::DNSKEY);
    for (const auto& rr : rrset) {
        const auto& key = *rr.as<Dnskey>();
        if (!ds_matches_key(ds, owner, key)) continue;
        out.reason = BogusReason::NoValidSignature;
        for (const auto& sig : sigs)
            if (verify_rrsig(rrset, sig, key, now, policy.supported) == VerifyOutcome::Valid) {
                out.state = SecurityState::Secure;
                out.reason.reset();
                for (const auto& k : rrset) out.keys.push_back(*k.as<Dnskey>());
                return out;
            }
    }
    return out;
}

QueryFn network_transport(const Endpoint& server, const ClientOptions& options) {
    return [server, options](const DnsMessage& query) { return exchange(server, query, options); };
}

Disposition disposition_for(SecurityState state, const ValidatorPolicy& policy) noexcept {
    switch (state) {
        case SecurityState::Secure:
        case SecurityState::Insecure: return Disposition::Answer;
        case SecurityState::Bogus: return policy.bogus_passthrough() ? Disposition::Answer : Disposition::ServFail;
        case SecurityState::Indeterminate: return Disposition::ServFail;
    }
    return Disposition::ServFail;
}

ValidationResult validate_name(const Question& question, const QueryFn& transport, const TrustAnchor& anchor,
                               const ValidatorPolicy& policy, std::uint32_t now) {
    ValidationResult result;
    result.question = question;
    Walk walk(question, anchor, policy, now, result);

    if (!question.name.is_subdomain_of(anchor.zone)) {
        walk.note(anchor.zone, "scope", question.name.to_string() + " is outside the trust anchor");
        return result;
    }
    if (anchor.keys.empty() && anchor.ds.empty()) {
        walk.note(anchor.zone, "scope", "trust anchor holds no keys");
        return result;
    }

    // Fetch everything before interpreting anything, so the policy cannot
    // influence which queries go out.
    std::uint16_t next_id = 0x4000;
    const auto ask = [&](const DnsName& name, std::uint16_t type) {
        DnsMessage q = make_query(next_id++, name, type, true);
        q.header.cd = true;
        result.queries.push_back(q.questions.front());
        return transport(q);
    };

    DnsMessage anchor_keys, target;
    std::vector<Cut> cuts;
    try {
        anchor_keys = ask(anchor.zone, rrtype::DNSKEY);
        std::vector<DnsName> below;
        for (DnsName n = question.name; n.label_count() > anchor.zone.label_count(); n = n.parent()) below.push_back(n);
        std::reverse(below.begin(), below.end());
        for (const auto& n : below) {
            const DnsMessage soa = ask(n, rrtype::SOA);
            if (soa.header.rcode != rcode::NoError || rrset_of(soa.answers, n, rrtype::SOA).empty()) continue;
            Cut cut{n, ask(n, rrtype::DS), {}};
            cut.dnskey = ask(n, rrtype::DNSKEY);
            cuts.push_back(std::move(cut));
        }
        target = ask(question.name, question.type);
    } catch (const std::exception& e) {
        walk.note(anchor.zone, "transport", std::string("failure: ") + e.what());
        return result;
    }

    ZoneState zone = walk.validate_anchor(anchor_keys);
    for (std::size_t i = 0; i < cuts.size() && zone.state != SecurityState::Bogus; ++i)
        zone = walk.step(zone, cuts[i], i + 1 == cuts.size(), target);

    if (!answerable(target.header.rcode)) {
        walk.note(zone.zone, "target", "upstream " + rcode_to_string(target.header.rcode));
        return result;
    }
    result.state = walk.target(zone, target);
    result.rcode = target.header.rcode;
    result.answer = target.answers;
    result.disposition = disposition_for(result.state, policy);
    result.ad = result.state == SecurityState::Secure && result.disposition == Disposition::Answer;
    if (result.state == SecurityState::Bogus && result.disposition == Disposition::Answer) {
        result.policy_deviation = true;
        walk.note(zone.zone, "response", "Bogus answer passed through without AD");
    }
    return result;
}

DnsMessage render_response(const ValidationResult& result, const ValidatorPolicy& policy, const DnsMessage& query) {
    DnsMessage out;
    out.header = query.header;
    out.header.qr = true;
    out.header.aa = false;
    out.header.tc = false;
    out.header.ra = true;
    out.header.ad = false;
    out.questions = query.questions;
    if (query.edns) {
        out.edns = Edns{};
        out.edns->dnssec_ok = query.edns->dnssec_ok;
    }
    if (disposition_for(result.state, policy) == Disposition::ServFail) {
        out.header.rcode = rcode::ServFail;
        return out;
    }
    out.header.rcode = result.rcode;
    out.header.ad = result.state == SecurityState::Secure;
    out.answers = result.answer;
    return out;
}

}  // namespace agility
