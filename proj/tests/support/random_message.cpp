#include "random_message.hpp"

#include <array>
#include <set>

#include "agility/message.hpp"

namespace testing_support {

using namespace agility;

namespace {

const std::array<const char*, 10> kLabels = {"www", "example", "test", "mail", "ns1", "victim", "a", "zone-b", "x", "sub"};

std::uint32_t u32(Rng& rng) { return static_cast<std::uint32_t>(rng()); }
std::uint16_t u16(Rng& rng) { return static_cast<std::uint16_t>(rng()); }
std::uint8_t u8(Rng& rng) { return static_cast<std::uint8_t>(rng()); }
bool coin(Rng& rng) { return (rng() & 1) != 0; }

Bytes random_bytes(Rng& rng, std::size_t min, std::size_t max) {
    std::uniform_int_distribution<std::size_t> len(min, max);
    Bytes out(len(rng));
    for (auto& b : out) b = u8(rng);
    return out;
}

}  // namespace

DnsName random_name(Rng& rng, std::size_t max_labels) {
    std::uniform_int_distribution<std::size_t> count(0, max_labels);
    std::uniform_int_distribution<std::size_t> pick(0, kLabels.size() - 1);
    std::vector<std::string> labels;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::string label = kLabels[pick(rng)];
        for (auto& c : label)
            if (coin(rng) && (rng() % 4 == 0) && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        labels.push_back(std::move(label));
    }
    return DnsName(std::move(labels));
}

ResourceRecord random_record(Rng& rng, std::uint16_t type) {
    const DnsName owner = random_name(rng);
    const std::uint32_t ttl = u32(rng) % 86400;
    switch (type) {
        case rrtype::A: return ResourceRecord::make(owner, ttl, ARdata{{u8(rng), u8(rng), u8(rng), u8(rng)}});
        case rrtype::NS: return ResourceRecord::make(owner, ttl, NsRdata{random_name(rng)});
        case rrtype::SOA:
            return ResourceRecord::make(
                owner, ttl, SoaRdata{random_name(rng), random_name(rng), u32(rng), u32(rng), u32(rng), u32(rng), u32(rng)});
        case rrtype::DNSKEY:
            return ResourceRecord::make(owner, ttl, DnskeyRdata{u16(rng), u8(rng), u8(rng), random_bytes(rng, 0, 96)});
        case rrtype::DS:
            return ResourceRecord::make(owner, ttl, DsRdata{u16(rng), u8(rng), u8(rng), random_bytes(rng, 0, 48)});
        case rrtype::RRSIG: {
            RrsigRdata sig{u16(rng), u8(rng),  u8(rng),          u32(rng),
                           u32(rng), u32(rng), u16(rng), random_name(rng), random_bytes(rng, 0, 128)};
            return ResourceRecord::make(owner, ttl, sig);
        }
        default: return ResourceRecord::opaque(owner, type, ttl, random_bytes(rng, 0, 40));
    }
}

ResourceRecord random_record(Rng& rng) {
    static const std::array<std::uint16_t, 9> types = {rrtype::A,   rrtype::NS,  rrtype::SOA,
                                                       rrtype::DNSKEY, rrtype::DS, rrtype::RRSIG,
                                                       rrtype::MX,  rrtype::TXT, 65280};
    return random_record(rng, types[rng() % types.size()]);
}

DnsMessage random_message(Rng& rng) {
    DnsMessage msg;
    auto& h = msg.header;
    h.id = u16(rng);
    h.qr = coin(rng);
    h.opcode = static_cast<std::uint8_t>(rng() % 16);
    h.aa = coin(rng);
    h.tc = coin(rng);
    h.rd = coin(rng);
    h.ra = coin(rng);
    h.z = coin(rng);
    h.ad = coin(rng);
    h.cd = coin(rng);
    h.rcode = static_cast<std::uint8_t>(rng() % 16);
    const std::size_t questions = rng() % 3;
    for (std::size_t i = 0; i < questions; ++i) msg.questions.push_back({random_name(rng), u16(rng), rrclass::IN});
    for (auto* section : {&msg.answers, &msg.authority, &msg.additional}) {
        const std::size_t n = rng() % 5;
        for (std::size_t i = 0; i < n; ++i) section->push_back(random_record(rng));
    }
    if (coin(rng)) {
        Edns e;
        e.udp_payload_size = u16(rng);
        e.extended_rcode = u8(rng);
        e.version = u8(rng);
        e.dnssec_ok = coin(rng);
        e.other_flags = u16(rng) & 0x7FFF;
        if (coin(rng)) {
            Bytes data = random_bytes(rng, 0, 12);
            e.options = {0x00, 0x0A, 0x00, static_cast<std::uint8_t>(data.size())};
            e.options.insert(e.options.end(), data.begin(), data.end());
        }
        msg.edns = e;
    }
    return msg;
}

std::vector<ResourceRecord> random_a_rrset(Rng& rng, std::size_t count) {
    DnsName owner = random_name(rng, 3).prepend("host");
    const std::uint32_t ttl = 60 + u32(rng) % 3600;
    std::set<std::array<std::uint8_t, 4>> seen;
    std::vector<ResourceRecord> out;
    while (out.size() < count) {
        std::array<std::uint8_t, 4> addr{u8(rng), u8(rng), u8(rng), u8(rng)};
        if (!seen.insert(addr).second) continue;
        out.push_back(ResourceRecord::make(owner, ttl, ARdata{addr}));
    }
    return out;
}

}  // namespace testing_support
