#include "agility/zone.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "agility/errors.hpp"
#include "agility/text.hpp"

namespace agility {

using json = nlohmann::json;

namespace {

constexpr std::uint32_t kDefaultTtl = 3600;

[[noreturn]] void invalid(const std::string& what) { throw ZoneError(ZoneErrc::InvalidConfig, what); }

DnsName parse_name(const json& j, const char* field) {
    try {
        return DnsName::parse(j.at(field).get<std::string>());
    } catch (const WireError& e) {
        invalid(std::string(field) + ": " + e.what());
    }
}

KeyRole parse_role(const std::string& text) {
    if (text == "KSK") return KeyRole::KSK;
    if (text == "ZSK") return KeyRole::ZSK;
    invalid("key role must be KSK or ZSK, got '" + text + "'");
}

std::string key_label(const DnsName& apex, std::size_t index, const KeySpec& spec) {
    return apex.lowercased().to_string() + "#" + std::to_string(index) + "/" + std::to_string(spec.algorithm) + "/" +
           std::string(to_string(spec.role));
}

}  // namespace

// --- config I/O -------------------------------------------------------------------

ZoneConfig ZoneConfig::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        ZoneConfig config;
        config.apex = parse_name(j, "apex");
        for (const auto& k : j.value("keys", json::array())) {
            KeySpec spec;
            spec.algorithm = k.at("algorithm").get<std::uint8_t>();
            spec.role = parse_role(k.at("role").get<std::string>());
            if (k.contains("private_key")) {
                try {
                    spec.key = KeyPair::from_private(spec.algorithm, spec.role,
                                                     from_base64(k.at("private_key").get<std::string>()));
                } catch (const DnssecError& e) {
                    if (e.code() == DnssecErrc::UnsupportedAlgorithm)
                        throw ZoneError(ZoneErrc::UnsupportedAlgorithm, e.what());
                    invalid(e.what());
                }
            }
            config.keys.push_back(std::move(spec));
        }
        for (const auto& r : j.value("records", json::array())) {
            const DnsName owner = parse_name(r, "owner");
            const auto type_text = r.at("type").get<std::string>();
            const auto type = type_from_string(type_text);
            if (!type) invalid("unknown record type '" + type_text + "'");
            const auto ttl = r.value("ttl", kDefaultTtl);
            const auto& data = r.at("data");
            if (!data.is_array() || data.empty()) invalid("record data must be a non-empty list");
            for (const auto& item : data) {
                try {
                    ResourceRecord rr{owner, *type, rrclass::IN, ttl, parse_rdata(*type, item.get<std::string>())};
                    config.records.push_back(std::move(rr));
                } catch (const std::invalid_argument& e) {
                    invalid(owner.to_string() + " " + type_text + ": " + e.what());
                } catch (const WireError& e) {
                    invalid(owner.to_string() + " " + type_text + ": " + e.what());
                }
            }
        }
        for (const auto& c : j.value("children", json::array())) {
            ChildSpec child;
            child.apex = parse_name(c, "apex");
            const auto& ds = c.value("ds", json("from_child_keys"));
            if (ds.is_string()) {
                const auto policy = ds.get<std::string>();
                if (policy == "from_child_keys") child.policy = DsPolicy::FromChildKeys;
                else if (policy == "absent") child.policy = DsPolicy::Absent;
                else invalid("ds policy must be from_child_keys, absent or a list, got '" + policy + "'");
            } else if (ds.is_array()) {
                child.policy = DsPolicy::Explicit;
                for (const auto& item : ds) {
                    try {
                        child.explicit_ds.push_back(std::get<Ds>(parse_rdata(rrtype::DS, item.get<std::string>())));
                    } catch (const std::invalid_argument& e) {
                        invalid(child.apex.to_string() + " DS: " + e.what());
                    }
                }
            } else {
                invalid("ds policy has the wrong type");
            }
            config.children.push_back(std::move(child));
        }
        return config;
    } catch (const json::exception& e) {
        invalid(e.what());
    }
}

namespace {

json config_to_json(const ZoneConfig& config) {
    json j;
    j["apex"] = config.apex.to_string();
    j["keys"] = json::array();
    for (const auto& spec : config.keys) {
        json k{{"algorithm", spec.algorithm}, {"role", std::string(to_string(spec.role))}};
        if (spec.key) k["private_key"] = to_base64(spec.key->private_material());
        j["keys"].push_back(std::move(k));
    }
    j["records"] = json::array();
    // Group consecutive records of one RRset back into a single entry.
    for (std::size_t i = 0; i < config.records.size();) {
        const auto& first = config.records[i];
        json data = json::array();
        std::size_t k = i;
        for (; k < config.records.size() && config.records[k].name.same_spelling(first.name) &&
               config.records[k].type == first.type && config.records[k].ttl == first.ttl;
             ++k)
            data.push_back(rdata_to_text(config.records[k]));
        j["records"].push_back(
            {{"owner", first.name.to_string()}, {"type", type_to_string(first.type)}, {"ttl", first.ttl}, {"data", data}});
        i = k;
    }
    j["children"] = json::array();
    for (const auto& child : config.children) {
        json c{{"apex", child.apex.to_string()}};
        switch (child.policy) {
            case DsPolicy::FromChildKeys: c["ds"] = "from_child_keys"; break;
            case DsPolicy::Absent: c["ds"] = "absent"; break;
            case DsPolicy::Explicit: {
                json list = json::array();
                for (const auto& ds : child.explicit_ds)
                    list.push_back(rdata_to_text(ResourceRecord::make(child.apex, 0, ds)));
                c["ds"] = list;
                break;
            }
        }
        j["children"].push_back(std::move(c));
    }
    return j;
}

}  // namespace

std::string ZoneConfig::to_json() const { return config_to_json(*this).dump(2); }

std::vector<ZoneConfig> ZoneTree::configs_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        invalid(e.what());
    }
    if (!j.contains("zones") || !j["zones"].is_array()) invalid("expected an object with a \"zones\" list");
    std::vector<ZoneConfig> out;
    for (const auto& z : j["zones"]) out.push_back(ZoneConfig::from_json(z.dump()));
    return out;
}

std::string ZoneTree::configs_to_json(std::span<const ZoneConfig> configs) {
    json j;
    j["zones"] = json::array();
    for (const auto& c : configs) j["zones"].push_back(config_to_json(c));
    return j.dump(2);
}

// --- SignedZone --------------------------------------------------------------------

std::vector<KeyPair> SignedZone::keys_with_role(KeyRole role) const {
    std::vector<KeyPair> out;
    for (const auto& k : keys_)
        if (k.role() == role) out.push_back(k);
    return out;
}

std::vector<KeyPair> SignedZone::signing_zsks() const {
    std::vector<KeyPair> out;
    std::set<std::uint8_t> seen;
    for (const auto& k : keys_)
        if (k.role() == KeyRole::ZSK && seen.insert(k.dnskey().algorithm).second) out.push_back(k);
    return out;
}

const SignedRrset* SignedZone::find(const DnsName& owner, std::uint16_t type) const {
    const auto it = rrsets_.find({owner, type});
    return it == rrsets_.end() ? nullptr : &it->second;
}

bool SignedZone::name_exists(const DnsName& name) const {
    // Canonical order puts every descendant of `name` directly after it.
    const auto it = rrsets_.lower_bound({name, 0});
    return it != rrsets_.end() && it->first.first.is_subdomain_of(name);
}

namespace {

std::vector<ResourceRecord> sign_with(const std::vector<ResourceRecord>& rrset, std::span<const KeyPair> keys,
                                      const DnsName& signer, std::uint32_t inception, std::uint32_t expiration) {
    std::vector<ResourceRecord> sigs;
    for (const auto& key : keys) {
        const auto meta = signature_meta(rrset.front(), key.dnskey(), signer, inception, expiration);
        sigs.push_back(ResourceRecord::make(rrset.front().name, rrset.front().ttl, sign_rrset(rrset, meta, key)));
    }
    return sigs;
}

const SignedZone* find_zone(std::span<const SignedZone> zones, const DnsName& apex) {
    for (const auto& z : zones)
        if (z.apex() == apex) return &z;
    return nullptr;
}

const SignedZone* deepest_zone(std::span<const SignedZone> zones, const DnsName& name) {
    const SignedZone* best = nullptr;
    for (const auto& z : zones)
        if (name.is_subdomain_of(z.apex()) && (!best || z.apex().label_count() > best->apex().label_count())) best = &z;
    return best;
}

}  // namespace

SignedZone build_zone(const ZoneConfig& config, const ZoneBuildOptions& options, std::span<const SignedZone> children) {
    const DnsName& apex = config.apex;
    if (config.records.empty()) throw ZoneError(ZoneErrc::EmptyZone, apex.to_string() + " has no records");

    for (const auto& child : config.children)
        if (child.apex == apex || !child.apex.is_subdomain_of(apex))
            invalid("child " + child.apex.to_string() + " is not below " + apex.to_string());
    for (const auto& rr : config.records) {
        if (!rr.name.is_subdomain_of(apex)) invalid(rr.name.to_string() + " is outside " + apex.to_string());
        for (const auto& child : config.children)
            if (rr.name.is_subdomain_of(child.apex))
                invalid(rr.name.to_string() + " belongs to child zone " + child.apex.to_string());
        if (rr.type == rrtype::RRSIG || rr.type == rrtype::DNSKEY || rr.type == rrtype::DS || rr.type == rrtype::OPT)
            invalid(type_to_string(rr.type) + " records are generated, not configured");
    }

    SignedZone zone;
    zone.config_ = config;
    zone.inception_ = options.now - options.inception_offset;
    zone.expiration_ = options.now + options.validity;

    for (std::size_t i = 0; i < config.keys.size(); ++i) {
        const auto& spec = config.keys[i];
        if (!AlgorithmSupport::signable().count(spec.algorithm))
            throw ZoneError(ZoneErrc::UnsupportedAlgorithm, "algorithm " + std::to_string(spec.algorithm) + " (" +
                                                                algorithm_mnemonic(spec.algorithm) + ") cannot sign");
        if (spec.key) {
            if (spec.key->dnskey().algorithm != spec.algorithm || spec.key->role() != spec.role)
                invalid("supplied key does not match its algorithm/role");
            zone.keys_.push_back(*spec.key);
            continue;
        }
        const RandomBytes random =
            options.seed.empty() ? system_bytes() : seeded_bytes(options.seed, key_label(apex, i, spec));
        zone.keys_.push_back(KeyPair::generate(spec.algorithm, spec.role, random, options.rsa_bits));
    }
    if (zone.is_signed() && (zone.keys_with_role(KeyRole::KSK).empty() || zone.keys_with_role(KeyRole::ZSK).empty()))
        invalid(apex.to_string() + " needs at least one KSK and one ZSK");

    auto& rrsets = zone.rrsets_;
    for (const auto& rr : config.records) {
        auto& entry = rrsets[{rr.name, rr.type}];
        ResourceRecord copy = rr;
        if (!entry.records.empty()) copy.ttl = entry.records.front().ttl;
        if (std::find(entry.records.begin(), entry.records.end(), copy) == entry.records.end())
            entry.records.push_back(std::move(copy));
    }
    const DnsName ns_host = apex.prepend("ns1");
    if (!rrsets.count({apex, rrtype::SOA})) {
        SoaRdata soa{ns_host, apex.prepend("hostmaster"), 1, 7200, 3600, 1209600, 300};
        rrsets[{apex, rrtype::SOA}].records.push_back(ResourceRecord::make(apex, kDefaultTtl, soa));
    }
    if (!rrsets.count({apex, rrtype::NS}))
        rrsets[{apex, rrtype::NS}].records.push_back(ResourceRecord::make(apex, kDefaultTtl, NsRdata{ns_host}));

    std::set<std::pair<DnsName, std::uint16_t>> delegation_ns;
    for (const auto& child : config.children) {
        auto& ns = rrsets[{child.apex, rrtype::NS}];
        ns.records.push_back(ResourceRecord::make(child.apex, kDefaultTtl, NsRdata{child.apex.prepend("ns1")}));
        delegation_ns.insert({child.apex, rrtype::NS});

        std::vector<Ds> ds;
        switch (child.policy) {
            case DsPolicy::Absent: break;
            case DsPolicy::Explicit: ds = child.explicit_ds; break;
            case DsPolicy::FromChildKeys: {
                const SignedZone* built = find_zone(children, child.apex);
                if (!built) invalid("child " + child.apex.to_string() + " must be built before its parent");
                for (const auto& ksk : built->keys_with_role(KeyRole::KSK))
                    ds.push_back(make_ds(child.apex, ksk.dnskey()));
                break;
            }
        }
        for (const auto& d : ds) rrsets[{child.apex, rrtype::DS}].records.push_back(ResourceRecord::make(child.apex, kDefaultTtl, d));
    }

    if (!zone.is_signed()) return zone;

    const auto zsks = zone.signing_zsks();
    for (auto& [key, entry] : rrsets) {
        if (delegation_ns.count(key)) continue;
        entry.signatures = sign_with(entry.records, zsks, apex, zone.inception_, zone.expiration_);
    }
    auto& dnskeys = rrsets[{apex, rrtype::DNSKEY}];
    for (const auto& k : zone.keys_) dnskeys.records.push_back(ResourceRecord::make(apex, kDefaultTtl, k.dnskey()));
    dnskeys.signatures =
        sign_with(dnskeys.records, zone.keys_with_role(KeyRole::KSK), apex, zone.inception_, zone.expiration_);
    return zone;
}

// --- ZoneTree ----------------------------------------------------------------------

ZoneTree::ZoneTree(std::vector<SignedZone> zones) {
    for (std::size_t i = 0; i < zones.size(); ++i)
        for (std::size_t k = i + 1; k < zones.size(); ++k)
            if (zones[i].apex() == zones[k].apex()) invalid("zone " + zones[i].apex().to_string() + " appears twice");
    // Published DS sets come from each zone's parent.
    for (auto& z : zones) {
        z.ds_published_.clear();
        if (z.apex().is_root()) continue;
        if (const SignedZone* parent = deepest_zone(zones, z.apex().parent()))
            if (const auto* ds = parent->find(z.apex(), rrtype::DS))
                for (const auto& rr : ds->records) z.ds_published_.push_back(*rr.as<Ds>());
    }
    zones_ = std::make_shared<const std::vector<SignedZone>>(std::move(zones));
}

ZoneTree ZoneTree::build(std::vector<ZoneConfig> configs, const ZoneBuildOptions& options) {
    std::stable_sort(configs.begin(), configs.end(), [](const ZoneConfig& a, const ZoneConfig& b) {
        return a.apex.label_count() > b.apex.label_count();
    });
    std::vector<SignedZone> built;
    built.reserve(configs.size());
    for (const auto& config : configs) built.push_back(build_zone(config, options, built));
    std::reverse(built.begin(), built.end());
    return ZoneTree(std::move(built));
}

const SignedZone& ZoneTree::anchor() const {
    if (zones_->empty()) invalid("empty zone tree");
    const SignedZone* best = &zones_->front();
    for (const auto& z : *zones_)
        if (z.apex().label_count() < best->apex().label_count()) best = &z;
    return *best;
}

const SignedZone* ZoneTree::zone(const DnsName& apex) const { return find_zone(*zones_, apex); }

const SignedZone* ZoneTree::zone_for(const DnsName& name) const { return deepest_zone(*zones_, name); }

const SignedZone* ZoneTree::parent_of(const SignedZone& zone) const {
    if (zone.apex().is_root()) return nullptr;
    return zone_for(zone.apex().parent());
}

std::vector<Dnskey> ZoneTree::trust_anchors() const {
    std::vector<Dnskey> out;
    for (const auto& k : anchor().keys_with_role(KeyRole::KSK)) out.push_back(k.dnskey());
    return out;
}

// --- answering ---------------------------------------------------------------------

namespace {

void append(std::vector<ResourceRecord>& section, const SignedRrset& rrset, bool dnssec_ok) {
    section.insert(section.end(), rrset.records.begin(), rrset.records.end());
    if (dnssec_ok) section.insert(section.end(), rrset.signatures.begin(), rrset.signatures.end());
}

}  // namespace

DnsMessage answer_query(const ZoneTree& tree, const DnsMessage& query) {
    DnsMessage response;
    response.header.id = query.header.id;
    response.header.qr = true;
    response.header.opcode = query.header.opcode;
    response.header.rd = query.header.rd;
    response.header.cd = query.header.cd;
    response.questions = query.questions;
    if (query.edns) {
        Edns edns;
        edns.dnssec_ok = query.edns->dnssec_ok;
        response.edns = edns;
    }

    if (query.header.qr || query.questions.size() != 1) {
        response.header.rcode = rcode::FormErr;
        return response;
    }
    if (query.header.opcode != 0) {
        response.header.rcode = rcode::NotImp;
        return response;
    }
    const Question& q = query.questions.front();
    const SignedZone* zone = tree.zone_for(q.name);
    if (zone && q.type == rrtype::DS && zone->apex() == q.name)
        if (const SignedZone* parent = tree.parent_of(*zone)) zone = parent;
    if (!zone || q.qclass != rrclass::IN) {
        response.header.rcode = rcode::Refused;
        return response;
    }

    response.header.aa = true;
    const bool dnssec_ok = query.dnssec_ok();
    if (const SignedRrset* rrset = zone->find(q.name, q.type)) {
        append(response.answers, *rrset, dnssec_ok);
        return response;
    }
    if (!zone->name_exists(q.name)) response.header.rcode = rcode::NxDomain;
    if (const SignedRrset* soa = zone->find(zone->apex(), rrtype::SOA)) append(response.authority, *soa, dnssec_ok);
    return response;
}

}  // namespace agility
