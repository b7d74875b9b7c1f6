#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "agility/errors.hpp"
#include "agility/name.hpp"

using agility::DnsName;
using agility::WireErrc;
using agility::WireError;

TEST(DnsName, ParsesAndPrintsWithTrailingDot) {
    EXPECT_EQ(DnsName::parse("www.Example.test").to_string(), "www.Example.test.");
    EXPECT_EQ(DnsName::parse("www.Example.test.").label_count(), 3u);
    EXPECT_TRUE(DnsName::parse(".").is_root());
    EXPECT_EQ(DnsName::parse(".").to_string(), ".");
}

TEST(DnsName, EscapesRoundTrip) {
    const auto name = DnsName::parse(R"(a\.b.c\\d.\065x.)");
    ASSERT_EQ(name.label_count(), 3u);
    EXPECT_EQ(name.labels()[0], "a.b");
    EXPECT_EQ(name.labels()[1], "c\\d");
    EXPECT_EQ(name.labels()[2], "Ax");
    EXPECT_EQ(DnsName::parse(name.to_string()).labels(), name.labels());
}

TEST(DnsName, RejectsOversizedLabelsAndNames) {
    const std::string label64(64, 'a');
    try {
        DnsName::parse(label64 + ".test.");
        FAIL() << "expected InvalidName";
    } catch (const WireError& e) {
        EXPECT_EQ(e.code(), WireErrc::InvalidName);
    }
    std::string long_name;
    for (int i = 0; i < 5; ++i) long_name += std::string(60, 'b') + ".";
    EXPECT_THROW(DnsName::parse(long_name), WireError);
    EXPECT_THROW(DnsName::parse("a..b."), WireError);
}

TEST(DnsName, EqualityIgnoresCaseButSpellingIsKept) {
    const auto a = DnsName::parse("WWW.example.TEST.");
    const auto b = DnsName::parse("www.example.test.");
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a.same_spelling(b));
    EXPECT_EQ(agility::DnsNameHash{}(a), agility::DnsNameHash{}(b));
    EXPECT_EQ(a.lowercased().to_string(), "www.example.test.");
}

TEST(DnsName, CanonicalOrderingMatchesWorkedExample) {
    // Ordering example from the DNSSEC records specification, in sorted order.
    const std::vector<std::string> sorted = {
        "example.", "a.example.", "yljkjljk.a.example.", "Z.a.example.", "zABC.a.EXAMPLE.",
        "z.example.", "\\001.z.example.", "*.z.example.", "\\200.z.example.",
    };
    std::vector<DnsName> names;
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) names.push_back(DnsName::parse(*it));
    std::sort(names.begin(), names.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_TRUE(names[i].same_spelling(DnsName::parse(sorted[i]))) << i;
}

TEST(DnsName, AncestryAndWire) {
    const auto www = DnsName::parse("www.victim.test.");
    EXPECT_TRUE(www.is_subdomain_of(DnsName::parse("VICTIM.test.")));
    EXPECT_TRUE(www.is_subdomain_of(DnsName{}));
    EXPECT_TRUE(www.is_subdomain_of(www));
    EXPECT_FALSE(DnsName::parse("victim.test.").is_subdomain_of(www));
    EXPECT_FALSE(DnsName::parse("xvictim.test.").is_subdomain_of(DnsName::parse("victim.test.")));
    EXPECT_EQ(www.parent().to_string(), "victim.test.");
    EXPECT_THROW(DnsName{}.parent(), WireError);
    EXPECT_EQ(DnsName::parse("victim.test.").prepend("www"), www);
    const agility::Bytes wire = DnsName::parse("Ab.c.").to_wire();
    EXPECT_EQ(wire, (agility::Bytes{2, 'A', 'b', 1, 'c', 0}));
    EXPECT_EQ(DnsName::parse("Ab.c.").canonical_wire(), (agility::Bytes{2, 'a', 'b', 1, 'c', 0}));
    EXPECT_EQ(www.wire_length(), www.to_wire().size());
}
