#include "agility/name.hpp"

#include <algorithm>

#include "agility/errors.hpp"

namespace agility {

char ascii_lower(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

namespace {

int compare_label(const std::string& a, const std::string& b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ca = static_cast<unsigned char>(ascii_lower(a[i]));
        const auto cb = static_cast<unsigned char>(ascii_lower(b[i]));
        if (ca != cb) return ca < cb ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

void check_labels(const std::vector<std::string>& labels) {
    std::size_t total = 1;
    for (const auto& label : labels) {
        if (label.empty()) throw WireError(WireErrc::InvalidName, "empty label");
        if (label.size() > DnsName::kMaxLabelLength)
            throw WireError(WireErrc::InvalidName, "label longer than 63 bytes");
        total += label.size() + 1;
    }
    if (total > DnsName::kMaxWireLength)
        throw WireError(WireErrc::InvalidName, "name longer than 255 bytes");
}

}  // namespace

DnsName::DnsName(std::vector<std::string> labels) : labels_(std::move(labels)) {
    check_labels(labels_);
}

DnsName DnsName::parse(std::string_view text) {
    if (text.empty() || text == ".") return DnsName{};
    std::vector<std::string> labels;
    std::string current;
    bool pending = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\\') {
            if (i + 1 >= text.size()) throw WireError(WireErrc::InvalidName, "dangling escape");
            const char next = text[i + 1];
            if (next >= '0' && next <= '9') {
                int value = 0;
                for (std::size_t k = 1; k <= 3; ++k) {
                    if (i + k >= text.size()) throw WireError(WireErrc::InvalidName, "short \\DDD escape");
                    const char d = text[i + k];
                    if (d < '0' || d > '9') throw WireError(WireErrc::InvalidName, "bad \\DDD escape");
                    value = value * 10 + (d - '0');
                }
                if (value > 255) throw WireError(WireErrc::InvalidName, "\\DDD escape above 255");
                current.push_back(static_cast<char>(value));
                i += 3;
            } else {
                current.push_back(next);
                i += 1;
            }
            pending = true;
        } else if (c == '.') {
            if (current.empty()) throw WireError(WireErrc::InvalidName, "empty label in '" + std::string(text) + "'");
            labels.push_back(std::move(current));
            current.clear();
            pending = false;
        } else {
            current.push_back(c);
            pending = true;
        }
    }
    if (pending) labels.push_back(std::move(current));
    return DnsName(std::move(labels));
}

std::size_t DnsName::wire_length() const noexcept {
    std::size_t total = 1;
    for (const auto& label : labels_) total += label.size() + 1;
    return total;
}

std::string DnsName::to_string() const {
    if (labels_.empty()) return ".";
    std::string out;
    for (const auto& label : labels_) {
        for (const char ch : label) {
            const auto c = static_cast<unsigned char>(ch);
            if (c == '.' || c == '\\') {
                out.push_back('\\');
                out.push_back(ch);
            } else if (c <= 0x20 || c >= 0x7f) {
                out.push_back('\\');
                out.push_back(static_cast<char>('0' + c / 100));
                out.push_back(static_cast<char>('0' + (c / 10) % 10));
                out.push_back(static_cast<char>('0' + c % 10));
            } else {
                out.push_back(ch);
            }
        }
        out.push_back('.');
    }
    return out;
}

DnsName DnsName::lowercased() const {
    DnsName out = *this;
    for (auto& label : out.labels_)
        std::transform(label.begin(), label.end(), label.begin(), ascii_lower);
    return out;
}

DnsName DnsName::parent() const {
    if (labels_.empty()) throw WireError(WireErrc::InvalidName, "root has no parent");
    DnsName out;
    out.labels_.assign(labels_.begin() + 1, labels_.end());
    return out;
}

DnsName DnsName::prepend(std::string_view label) const {
    std::vector<std::string> labels;
    labels.reserve(labels_.size() + 1);
    labels.emplace_back(label);
    labels.insert(labels.end(), labels_.begin(), labels_.end());
    return DnsName(std::move(labels));
}

bool DnsName::is_subdomain_of(const DnsName& ancestor) const {
    if (ancestor.labels_.size() > labels_.size()) return false;
    const std::size_t offset = labels_.size() - ancestor.labels_.size();
    for (std::size_t i = 0; i < ancestor.labels_.size(); ++i) {
        if (compare_label(labels_[offset + i], ancestor.labels_[i]) != 0) return false;
    }
    return true;
}

Bytes DnsName::to_wire() const {
    Bytes out;
    out.reserve(wire_length());
    for (const auto& label : labels_) {
        out.push_back(static_cast<std::uint8_t>(label.size()));
        out.insert(out.end(), label.begin(), label.end());
    }
    out.push_back(0);
    return out;
}

Bytes DnsName::canonical_wire() const { return lowercased().to_wire(); }

bool operator==(const DnsName& a, const DnsName& b) noexcept {
    if (a.labels_.size() != b.labels_.size()) return false;
    for (std::size_t i = 0; i < a.labels_.size(); ++i) {
        if (compare_label(a.labels_[i], b.labels_[i]) != 0) return false;
    }
    return true;
}

std::strong_ordering operator<=>(const DnsName& a, const DnsName& b) noexcept {
    auto ia = a.labels_.rbegin();
    auto ib = b.labels_.rbegin();
    for (; ia != a.labels_.rend() && ib != b.labels_.rend(); ++ia, ++ib) {
        const int c = compare_label(*ia, *ib);
        if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return a.labels_.size() <=> b.labels_.size();
}

std::size_t DnsNameHash::operator()(const DnsName& name) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (const auto& label : name.labels()) {
        for (const char c : label) {
            h ^= static_cast<unsigned char>(ascii_lower(c));
            h *= 1099511628211ULL;
        }
        h ^= 0x2e;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace agility
