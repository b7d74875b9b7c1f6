#include "agility/message.hpp"

#include <map>
#include <utility>

#include "agility/errors.hpp"

namespace agility {

std::string type_to_string(std::uint16_t type) {
    switch (type) {
        case rrtype::A: return "A";
        case rrtype::NS: return "NS";
        case rrtype::SOA: return "SOA";
        case rrtype::MX: return "MX";
        case rrtype::TXT: return "TXT";
        case rrtype::OPT: return "OPT";
        case rrtype::DS: return "DS";
        case rrtype::RRSIG: return "RRSIG";
        case rrtype::DNSKEY: return "DNSKEY";
        default: return "TYPE" + std::to_string(type);
    }
}

std::optional<std::uint16_t> type_from_string(std::string_view text) {
    static const std::pair<std::string_view, std::uint16_t> known[] = {
        {"A", rrtype::A},     {"NS", rrtype::NS},       {"SOA", rrtype::SOA},
        {"MX", rrtype::MX},   {"TXT", rrtype::TXT},     {"OPT", rrtype::OPT},
        {"DS", rrtype::DS},   {"RRSIG", rrtype::RRSIG}, {"DNSKEY", rrtype::DNSKEY},
    };
    std::string upper(text);
    for (auto& c : upper) c = static_cast<char>((c >= 'a' && c <= 'z') ? c - 'a' + 'A' : c);
    for (const auto& [name, value] : known)
        if (upper == name) return value;
    if (upper.rfind("TYPE", 0) == 0 && upper.size() > 4 && upper.size() <= 9) {
        unsigned long value = 0;
        for (std::size_t i = 4; i < upper.size(); ++i) {
            if (upper[i] < '0' || upper[i] > '9') return std::nullopt;
            value = value * 10 + static_cast<unsigned long>(upper[i] - '0');
        }
        if (value <= 0xffff) return static_cast<std::uint16_t>(value);
    }
    return std::nullopt;
}

std::string rcode_to_string(std::uint8_t code) {
    switch (code) {
        case rcode::NoError: return "NOERROR";
        case rcode::FormErr: return "FORMERR";
        case rcode::ServFail: return "SERVFAIL";
        case rcode::NxDomain: return "NXDOMAIN";
        case rcode::NotImp: return "NOTIMP";
        case rcode::Refused: return "REFUSED";
        default: return "RCODE" + std::to_string(code);
    }
}

std::optional<std::uint16_t> rdata_type(const Rdata& rdata) noexcept {
    struct Visitor {
        std::optional<std::uint16_t> operator()(const ARdata&) const { return rrtype::A; }
        std::optional<std::uint16_t> operator()(const NsRdata&) const { return rrtype::NS; }
        std::optional<std::uint16_t> operator()(const SoaRdata&) const { return rrtype::SOA; }
        std::optional<std::uint16_t> operator()(const DnskeyRdata&) const { return rrtype::DNSKEY; }
        std::optional<std::uint16_t> operator()(const DsRdata&) const { return rrtype::DS; }
        std::optional<std::uint16_t> operator()(const RrsigRdata&) const { return rrtype::RRSIG; }
        std::optional<std::uint16_t> operator()(const OpaqueRdata&) const { return std::nullopt; }
    };
    return std::visit(Visitor{}, rdata);
}

ResourceRecord ResourceRecord::make(DnsName name, std::uint32_t ttl, Rdata rdata) {
    const auto type = rdata_type(rdata);
    if (!type) throw WireError(WireErrc::InvalidRecord, "opaque rdata needs an explicit type");
    return ResourceRecord{std::move(name), *type, rrclass::IN, ttl, std::move(rdata)};
}

ResourceRecord ResourceRecord::opaque(DnsName name, std::uint16_t type, std::uint32_t ttl, Bytes data) {
    return ResourceRecord{std::move(name), type, rrclass::IN, ttl, OpaqueRdata{std::move(data)}};
}

std::vector<ResourceRecord>& DnsMessage::section(Section s) {
    switch (s) {
        case Section::Answer: return answers;
        case Section::Authority: return authority;
        case Section::Additional: return additional;
    }
    return answers;
}

const std::vector<ResourceRecord>& DnsMessage::section(Section s) const {
    return const_cast<DnsMessage*>(this)->section(s);
}

DnsMessage make_query(std::uint16_t id, const DnsName& name, std::uint16_t type, bool dnssec_ok,
                      bool recursion_desired) {
    DnsMessage q;
    q.header.id = id;
    q.header.rd = recursion_desired;
    q.questions.push_back(Question{name, type, rrclass::IN});
    if (dnssec_ok) {
        Edns edns;
        edns.udp_payload_size = 4096;
        edns.dnssec_ok = true;
        q.edns = edns;
    }
    return q;
}

std::size_t udp_limit_for(const DnsMessage& query) noexcept {
    if (!query.edns) return 512;
    return std::max<std::size_t>(512, query.edns->udp_payload_size);
}

namespace {

bool rdata_matches_type(const ResourceRecord& rr) {
    const auto typed = rdata_type(rr.rdata);
    if (typed) return *typed == rr.type;
    // Opaque rdata is only allowed for types without a typed representation.
    switch (rr.type) {
        case rrtype::A:
        case rrtype::NS:
        case rrtype::SOA:
        case rrtype::DNSKEY:
        case rrtype::DS:
        case rrtype::RRSIG:
        case rrtype::OPT: return false;
        default: return true;
    }
}

class Writer {
public:
    explicit Writer(bool compress) : compress_(compress) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v >> 16));
        u16(static_cast<std::uint16_t>(v));
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    // Compression matches exact spelling so that decoded names keep their case.
    void name(const DnsName& n, bool allow_compression, bool lowercase = false) {
        const auto& labels = n.labels();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            std::string key = suffix_key(labels, i, lowercase);
            if (compress_ && allow_compression) {
                if (auto it = offsets_.find(key); it != offsets_.end()) {
                    u16(static_cast<std::uint16_t>(0xC000 | it->second));
                    return;
                }
            }
            if (compress_ && out_.size() < 0x3FFF) offsets_.emplace(std::move(key), out_.size());
            std::string label = labels[i];
            if (lowercase)
                for (auto& c : label) c = ascii_lower(c);
            u8(static_cast<std::uint8_t>(label.size()));
            out_.insert(out_.end(), label.begin(), label.end());
        }
        u8(0);
    }

    std::size_t size() const noexcept { return out_.size(); }
    void patch_u16(std::size_t at, std::uint16_t v) {
        out_[at] = static_cast<std::uint8_t>(v >> 8);
        out_[at + 1] = static_cast<std::uint8_t>(v);
    }
    Bytes take() { return std::move(out_); }

private:
    static std::string suffix_key(const std::vector<std::string>& labels, std::size_t from, bool lowercase) {
        std::string key;
        for (std::size_t i = from; i < labels.size(); ++i) {
            key.push_back(static_cast<char>(labels[i].size()));
            for (const char c : labels[i]) key.push_back(lowercase ? ascii_lower(c) : c);
        }
        return key;
    }

    Bytes out_;
    bool compress_;
    std::map<std::string, std::size_t> offsets_;
};

void write_rdata(Writer& w, const ResourceRecord& rr, bool canonical) {
    struct Visitor {
        Writer& w;
        bool canonical;
        void operator()(const ARdata& a) const { w.bytes(a.address); }
        void operator()(const NsRdata& ns) const { w.name(ns.host, !canonical, canonical); }
        void operator()(const SoaRdata& soa) const {
            w.name(soa.mname, !canonical, canonical);
            w.name(soa.rname, !canonical, canonical);
            w.u32(soa.serial);
            w.u32(soa.refresh);
            w.u32(soa.retry);
            w.u32(soa.expire);
            w.u32(soa.minimum);
        }
        void operator()(const DnskeyRdata& k) const {
            w.u16(k.flags);
            w.u8(k.protocol);
            w.u8(k.algorithm);
            w.bytes(k.public_key);
        }
        void operator()(const DsRdata& ds) const {
            w.u16(ds.key_tag);
            w.u8(ds.algorithm);
            w.u8(ds.digest_type);
            w.bytes(ds.digest);
        }
        void operator()(const RrsigRdata& sig) const {
            w.u16(sig.type_covered);
            w.u8(sig.algorithm);
            w.u8(sig.labels);
            w.u32(sig.original_ttl);
            w.u32(sig.expiration);
            w.u32(sig.inception);
            w.u16(sig.key_tag);
            // Signer name is never compressed: signatures are computed over its
            // uncompressed form.
            w.name(sig.signer_name, false, canonical);
            w.bytes(sig.signature);
        }
        void operator()(const OpaqueRdata& o) const { w.bytes(o.data); }
    };
    std::visit(Visitor{w, canonical}, rr.rdata);
}

void write_record(Writer& w, const ResourceRecord& rr) {
    if (!rdata_matches_type(rr))
        throw WireError(WireErrc::InvalidRecord, "rdata does not match type " + type_to_string(rr.type));
    w.name(rr.name, true);
    w.u16(rr.type);
    w.u16(rr.rclass);
    w.u32(rr.ttl);
    const std::size_t length_at = w.size();
    w.u16(0);
    write_rdata(w, rr, false);
    const std::size_t rdlength = w.size() - length_at - 2;
    if (rdlength > 0xFFFF) throw WireError(WireErrc::InvalidRecord, "rdata longer than 65535 bytes");
    w.patch_u16(length_at, static_cast<std::uint16_t>(rdlength));
}

void write_opt(Writer& w, const Edns& edns) {
    w.u8(0);  // root owner
    w.u16(rrtype::OPT);
    w.u16(edns.udp_payload_size);
    w.u8(edns.extended_rcode);
    w.u8(edns.version);
    w.u16(static_cast<std::uint16_t>((edns.dnssec_ok ? Edns::kDoBit : 0) | (edns.other_flags & 0x7FFF)));
    if (edns.options.size() > 0xFFFF) throw WireError(WireErrc::InvalidRecord, "EDNS options too long");
    w.u16(static_cast<std::uint16_t>(edns.options.size()));
    w.bytes(edns.options);
}

void write_header(Writer& w, const Header& h, std::size_t qd, std::size_t an, std::size_t ns, std::size_t ar) {
    for (const std::size_t count : {qd, an, ns, ar})
        if (count > 0xFFFF) throw WireError(WireErrc::MessageTooLarge, "section has more than 65535 entries");
    w.u16(h.id);
    std::uint16_t flags = 0;
    if (h.qr) flags |= 0x8000;
    flags |= static_cast<std::uint16_t>((h.opcode & 0x0F) << 11);
    if (h.aa) flags |= 0x0400;
    if (h.tc) flags |= 0x0200;
    if (h.rd) flags |= 0x0100;
    if (h.ra) flags |= 0x0080;
    if (h.z) flags |= 0x0040;
    if (h.ad) flags |= 0x0020;
    if (h.cd) flags |= 0x0010;
    flags |= static_cast<std::uint16_t>(h.rcode & 0x0F);
    w.u16(flags);
    w.u16(static_cast<std::uint16_t>(qd));
    w.u16(static_cast<std::uint16_t>(an));
    w.u16(static_cast<std::uint16_t>(ns));
    w.u16(static_cast<std::uint16_t>(ar));
}

Bytes encode_full(const DnsMessage& msg) {
    Writer w(true);
    write_header(w, msg.header, msg.questions.size(), msg.answers.size(), msg.authority.size(),
                 msg.additional.size() + (msg.edns ? 1 : 0));
    for (const auto& q : msg.questions) {
        w.name(q.name, true);
        w.u16(q.type);
        w.u16(q.qclass);
    }
    for (const auto* sec : {&msg.answers, &msg.authority, &msg.additional}) {
        for (const auto& rr : *sec) {
            if (rr.type == rrtype::OPT)
                throw WireError(WireErrc::InvalidRecord, "OPT records are carried in DnsMessage::edns");
            write_record(w, rr);
        }
    }
    if (msg.edns) write_opt(w, *msg.edns);
    return w.take();
}

Bytes encode_truncated(const DnsMessage& msg) {
    Writer w(true);
    Header h = msg.header;
    h.tc = true;
    write_header(w, h, msg.questions.size(), 0, 0, msg.edns ? 1 : 0);
    for (const auto& q : msg.questions) {
        w.name(q.name, true);
        w.u16(q.type);
        w.u16(q.qclass);
    }
    if (msg.edns) write_opt(w, *msg.edns);
    return w.take();
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        const std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }
    Bytes bytes(std::size_t n) {
        need(n);
        Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    DnsName name() {
        std::vector<std::string> labels;
        std::size_t wire_len = 1;
        std::size_t cursor = pos_;
        bool jumped = false;
        for (;;) {
            if (cursor >= data_.size()) throw WireError(WireErrc::MalformedMessage, "name runs past end");
            const std::uint8_t len = data_[cursor];
            if ((len & 0xC0) == 0xC0) {
                if (cursor + 1 >= data_.size())
                    throw WireError(WireErrc::MalformedMessage, "truncated compression pointer");
                const std::size_t target = static_cast<std::size_t>(((len & 0x3F) << 8) | data_[cursor + 1]);
                // Only strictly backward pointers are accepted, which also bounds the chain.
                if (target >= cursor) throw WireError(WireErrc::CompressionLoop, "pointer does not point backwards");
                if (!jumped) pos_ = cursor + 2;
                jumped = true;
                cursor = target;
                continue;
            }
            if ((len & 0xC0) != 0) throw WireError(WireErrc::MalformedMessage, "unsupported label type");
            if (len == 0) {
                if (!jumped) pos_ = cursor + 1;
                break;
            }
            if (cursor + 1 + len > data_.size()) throw WireError(WireErrc::MalformedMessage, "label runs past end");
            wire_len += len + 1u;
            if (wire_len > DnsName::kMaxWireLength)
                throw WireError(WireErrc::MalformedMessage, "name longer than 255 bytes");
            labels.emplace_back(reinterpret_cast<const char*>(data_.data() + cursor + 1), len);
            cursor += 1 + len;
        }
        return DnsName(std::move(labels));
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw WireError(WireErrc::MalformedMessage, "unexpected end of data");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

Rdata read_rdata(Reader& r, std::uint16_t type, std::size_t rdlength) {
    const std::size_t start = r.pos();
    const std::size_t end = start + rdlength;
    if (r.remaining() < rdlength) throw WireError(WireErrc::MalformedMessage, "rdata runs past end");
    auto rest = [&]() -> std::size_t {
        if (r.pos() > end) throw WireError(WireErrc::MalformedMessage, "rdata overruns rdlength");
        return end - r.pos();
    };
    Rdata out;
    switch (type) {
        case rrtype::A: {
            if (rdlength != 4) throw WireError(WireErrc::MalformedMessage, "A rdata must be 4 bytes");
            ARdata a;
            for (auto& b : a.address) b = r.u8();
            out = a;
            break;
        }
        case rrtype::NS: out = NsRdata{r.name()}; break;
        case rrtype::SOA: {
            SoaRdata soa;
            soa.mname = r.name();
            soa.rname = r.name();
            if (rest() < 20) throw WireError(WireErrc::MalformedMessage, "short SOA rdata");
            soa.serial = r.u32();
            soa.refresh = r.u32();
            soa.retry = r.u32();
            soa.expire = r.u32();
            soa.minimum = r.u32();
            out = soa;
            break;
        }
        case rrtype::DNSKEY: {
            if (rdlength < 4) throw WireError(WireErrc::MalformedMessage, "short DNSKEY rdata");
            DnskeyRdata k;
            k.flags = r.u16();
            k.protocol = r.u8();
            k.algorithm = r.u8();
            k.public_key = r.bytes(rdlength - 4);
            out = std::move(k);
            break;
        }
        case rrtype::DS: {
            if (rdlength < 4) throw WireError(WireErrc::MalformedMessage, "short DS rdata");
            DsRdata ds;
            ds.key_tag = r.u16();
            ds.algorithm = r.u8();
            ds.digest_type = r.u8();
            ds.digest = r.bytes(rdlength - 4);
            out = std::move(ds);
            break;
        }
        case rrtype::RRSIG: {
            if (rdlength < 19) throw WireError(WireErrc::MalformedMessage, "short RRSIG rdata");
            RrsigRdata sig;
            sig.type_covered = r.u16();
            sig.algorithm = r.u8();
            sig.labels = r.u8();
            sig.original_ttl = r.u32();
            sig.expiration = r.u32();
            sig.inception = r.u32();
            sig.key_tag = r.u16();
            sig.signer_name = r.name();
            sig.signature = r.bytes(rest());
            out = std::move(sig);
            break;
        }
        case rrtype::OPT: throw WireError(WireErrc::MalformedMessage, "OPT outside the additional section");
        default: out = OpaqueRdata{r.bytes(rdlength)}; break;
    }
    if (r.pos() != end) throw WireError(WireErrc::MalformedMessage, "rdata length mismatch for " + type_to_string(type));
    return out;
}

}  // namespace

Bytes encode_message(const DnsMessage& msg, const EncodeOptions& options) {
    if (msg.header.rcode > 0x0F) throw WireError(WireErrc::InvalidRecord, "header rcode wider than 4 bits");
    Bytes full = encode_full(msg);
    if (full.size() <= options.max_size) return full;
    if (options.allow_truncation) {
        Bytes truncated = encode_truncated(msg);
        if (truncated.size() <= options.max_size) return truncated;
    }
    throw WireError(WireErrc::MessageTooLarge,
                    "encoded size " + std::to_string(full.size()) + " exceeds " + std::to_string(options.max_size));
}

DnsMessage decode_message(std::span<const std::uint8_t> wire) {
    if (wire.size() < 12) throw WireError(WireErrc::MalformedMessage, "shorter than a DNS header");
    Reader r(wire);
    DnsMessage msg;
    msg.header.id = r.u16();
    const std::uint16_t flags = r.u16();
    msg.header.qr = (flags & 0x8000) != 0;
    msg.header.opcode = static_cast<std::uint8_t>((flags >> 11) & 0x0F);
    msg.header.aa = (flags & 0x0400) != 0;
    msg.header.tc = (flags & 0x0200) != 0;
    msg.header.rd = (flags & 0x0100) != 0;
    msg.header.ra = (flags & 0x0080) != 0;
    msg.header.z = (flags & 0x0040) != 0;
    msg.header.ad = (flags & 0x0020) != 0;
    msg.header.cd = (flags & 0x0010) != 0;
    msg.header.rcode = static_cast<std::uint8_t>(flags & 0x0F);
    const std::uint16_t qd = r.u16();
    const std::uint16_t an = r.u16();
    const std::uint16_t ns = r.u16();
    const std::uint16_t ar = r.u16();

    for (std::uint16_t i = 0; i < qd; ++i) {
        Question q;
        q.name = r.name();
        q.type = r.u16();
        q.qclass = r.u16();
        msg.questions.push_back(std::move(q));
    }
    auto read_section = [&](std::uint16_t count, std::vector<ResourceRecord>& into, bool additional) {
        for (std::uint16_t i = 0; i < count; ++i) {
            ResourceRecord rr;
            rr.name = r.name();
            rr.type = r.u16();
            rr.rclass = r.u16();
            rr.ttl = r.u32();
            const std::uint16_t rdlength = r.u16();
            if (rr.type == rrtype::OPT) {
                if (!additional) throw WireError(WireErrc::MalformedMessage, "OPT outside the additional section");
                if (msg.edns) throw WireError(WireErrc::MalformedMessage, "more than one OPT record");
                if (!rr.name.is_root()) throw WireError(WireErrc::MalformedMessage, "OPT owner must be root");
                Edns edns;
                edns.udp_payload_size = rr.rclass;
                edns.extended_rcode = static_cast<std::uint8_t>(rr.ttl >> 24);
                edns.version = static_cast<std::uint8_t>(rr.ttl >> 16);
                edns.dnssec_ok = (rr.ttl & Edns::kDoBit) != 0;
                edns.other_flags = static_cast<std::uint16_t>(rr.ttl & 0x7FFF);
                edns.options = r.bytes(rdlength);
                msg.edns = std::move(edns);
                continue;
            }
            rr.rdata = read_rdata(r, rr.type, rdlength);
            into.push_back(std::move(rr));
        }
    };
    read_section(an, msg.answers, false);
    read_section(ns, msg.authority, false);
    read_section(ar, msg.additional, true);
    if (r.remaining() != 0) throw WireError(WireErrc::MalformedMessage, "trailing bytes after last section");
    return msg;
}

Bytes encode_rdata(const ResourceRecord& rr, bool canonical) {
    if (!rdata_matches_type(rr))
        throw WireError(WireErrc::InvalidRecord, "rdata does not match type " + type_to_string(rr.type));
    Writer w(false);
    write_rdata(w, rr, canonical);
    return w.take();
}

Rdata decode_rdata(std::uint16_t type, std::span<const std::uint8_t> rdata) {
    Reader r(rdata);
    return read_rdata(r, type, rdata.size());
}

}  // namespace agility
