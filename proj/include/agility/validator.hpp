#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agility/dnssec.hpp"
#include "agility/message.hpp"
#include "agility/net.hpp"

namespace agility {

enum class SecurityState { Secure, Insecure, Bogus, Indeterminate };
std::string_view to_string(SecurityState s) noexcept;

enum class PolicyName {
    Strict,
    V1UnknownRrsigInsecure,  // an RRSIG with an unimplemented algorithm makes its RRset Insecure
    V2UnknownDsInsecure,     // any unimplemented DS algorithm makes the child Insecure
    V3BogusPassthrough,      // Bogus answers are returned with NOERROR and AD clear
    V4AnyUnsupportedSkips,   // DS and RRSIG algorithm sets that differ skip validation
};
inline constexpr std::array<PolicyName, 5> kAllPolicies = {PolicyName::Strict, PolicyName::V1UnknownRrsigInsecure,
                                                           PolicyName::V2UnknownDsInsecure, PolicyName::V3BogusPassthrough,
                                                           PolicyName::V4AnyUnsupportedSkips};

/// "strict", "v1-unknown-rrsig", "v2-unknown-ds", "v3-bogus-passthrough", "v4-mismatch-skip".
std::string_view cli_name(PolicyName p) noexcept;
std::optional<PolicyName> policy_from_cli(std::string_view text) noexcept;

struct ValidatorPolicy {
    PolicyName name = PolicyName::Strict;
    AlgorithmSupport supported;

    bool unknown_rrsig_insecure() const noexcept { return name == PolicyName::V1UnknownRrsigInsecure; }
    bool unknown_ds_insecure() const noexcept { return name == PolicyName::V2UnknownDsInsecure; }
    bool bogus_passthrough() const noexcept { return name == PolicyName::V3BogusPassthrough; }
    bool mismatch_skips() const noexcept { return name == PolicyName::V4AnyUnsupportedSkips; }
};

/// Keys trusted a priori for `zone`, given directly or as DS records.
struct TrustAnchor {
    DnsName zone;
    std::vector<Dnskey> keys;
    std::vector<Ds> ds;
};

// --- chain steps -------------------------------------------------------------------

struct DsEvaluation {
    enum class Kind { SupportedSubset, NoneSupported, Empty };
    Kind kind = Kind::Empty;
    /// DS records whose algorithm and digest are both implemented, in input order.
    std::vector<Ds> supported;
};

DsEvaluation evaluate_ds_set(std::span<const Ds> ds_rrset, const ValidatorPolicy& policy);

enum class BogusReason { NoMatchingKey, NoValidSignature };
std::string_view to_string(BogusReason r) noexcept;

struct LinkResult {
    SecurityState state = SecurityState::Bogus;  // Secure or Bogus
    std::optional<BogusReason> reason;
    /// The validated DNSKEY RRset when Secure.
    std::vector<Dnskey> keys;
};

/// Secure iff some DNSKEY at `owner` digests to `ds` and signs the DNSKEY RRset validly.
/// `rrsigs` may contain signatures over other RRsets; only DNSKEY ones are used.
LinkResult validate_dnskey_link(const Ds& ds, const DnsName& owner, std::span<const ResourceRecord> dnskey_rrset,
                                std::span<const ResourceRecord> rrsigs, std::uint32_t now, const ValidatorPolicy& policy);

// --- walk --------------------------------------------------------------------------

/// Sends one query upstream. Throws NetError or WireError on transport failure.
using QueryFn = std::function<DnsMessage(const DnsMessage& query)>;

/// A QueryFn over UDP (TCP on truncation) to `server`.
QueryFn network_transport(const Endpoint& server, const ClientOptions& options = {});

struct TraceStep {
    DnsName zone;
    std::string step;
    std::string outcome;

    std::string to_string() const;
    bool operator==(const TraceStep&) const = default;
};

enum class Disposition { Answer, ServFail };

struct ValidationResult {
    Question question;
    SecurityState state = SecurityState::Indeterminate;
    Disposition disposition = Disposition::ServFail;
    bool ad = false;
    /// Upstream rcode for the target query (NOERROR or NXDOMAIN) when answering.
    std::uint8_t rcode = rcode::ServFail;
    /// Answer section of the target response, as received.
    std::vector<ResourceRecord> answer;
    std::vector<TraceStep> trace;
    /// Insecure only because no DS algorithm is implemented: the fallback the standard permits.
    bool downgraded_by_spec = false;
    /// A non-Strict policy switch changed the outcome.
    bool policy_deviation = false;
    /// Every query issued, in order. Independent of policy.
    std::vector<Question> queries;
};

/// Walks the chain from `anchor` to the target: all queries are issued first,
/// then interpreted under `policy`. Queries carry DO and CD.
ValidationResult validate_name(const Question& question, const QueryFn& transport, const TrustAnchor& anchor,
                               const ValidatorPolicy& policy, std::uint32_t now);

/// How `policy` answers a walk that ended in `state`.
Disposition disposition_for(SecurityState state, const ValidatorPolicy& policy) noexcept;

/// Response to `query` for `result`: SERVFAIL with no records, or the answer with AD per state.
DnsMessage render_response(const ValidationResult& result, const ValidatorPolicy& policy, const DnsMessage& query);

}  // namespace agility
