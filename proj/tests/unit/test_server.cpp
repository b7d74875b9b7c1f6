#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "agility/errors.hpp"
#include "agility/server.hpp"

using namespace agility;

namespace {

ZoneTree small_tree() {
    ZoneConfig c;
    c.apex = DnsName::parse("victim.test.");
    c.keys = {{13, KeyRole::KSK, {}}, {13, KeyRole::ZSK, {}}};
    c.records.push_back(ResourceRecord::make(DnsName::parse("www.victim.test."), 300, ARdata{{10, 0, 0, 1}}));
    for (int i = 0; i < 60; ++i)
        c.records.push_back(ResourceRecord::opaque(DnsName::parse("big.victim.test."), rrtype::TXT, 300,
                                                   Bytes{20, 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x',
                                                         'x', 'x', 'x', 'x', static_cast<std::uint8_t>('a' + i / 26), static_cast<std::uint8_t>('a' + i % 26)}));
    ZoneBuildOptions o;
    o.now = 1700000000;
    o.seed = "server-tests";
    return ZoneTree::build({c}, o);
}

}  // namespace

TEST(Server, LoopbackAnswerEqualsInProcessAnswer) {
    const ZoneTree tree = small_tree();
    auto listener = serve(Endpoint{"127.0.0.1", 0}, tree);
    ASSERT_NE(listener->endpoint().port, 0);
    for (const auto type : {rrtype::A, rrtype::DNSKEY, rrtype::SOA, rrtype::MX}) {
        const DnsMessage q = make_query(4242, DnsName::parse(type == rrtype::SOA ? "victim.test." : "www.victim.test."), type, true);
        EXPECT_EQ(exchange(listener->endpoint(), q), answer_query(tree, q));
    }
}

TEST(Server, TruncatedUdpFallsBackToTcp) {
    const ZoneTree tree = small_tree();
    auto listener = serve(Endpoint{"127.0.0.1", 0}, tree);
    const DnsMessage q = make_query(5, DnsName::parse("big.victim.test."), rrtype::TXT, false);
    const Bytes udp = exchange_raw(listener->endpoint(), encode_message(q), Transport::Udp, std::chrono::seconds(2));
    EXPECT_LE(udp.size(), 512u);
    EXPECT_TRUE(decode_message(udp).header.tc);
    const DnsMessage full = exchange(listener->endpoint(), q);
    EXPECT_FALSE(full.header.tc);
    EXPECT_EQ(full.answers.size(), 60u);

    ClientOptions no_fallback;
    no_fallback.tcp_fallback = false;
    EXPECT_TRUE(exchange(listener->endpoint(), q, no_fallback).header.tc);
}

TEST(Server, ConcurrentClientsKeepTheirIds) {
    const ZoneTree tree = small_tree();
    auto listener = serve(Endpoint{"127.0.0.1", 0}, tree);
    std::atomic<int> failures{0};
    auto client = [&](std::uint16_t base, Transport transport) {
        ClientOptions opts;
        opts.tcp_only = transport == Transport::Tcp;
        for (std::uint16_t i = 0; i < 1000; ++i) {
            const std::uint16_t id = static_cast<std::uint16_t>(base + i);
            try {
                const auto r = exchange(listener->endpoint(), make_query(id, DnsName::parse("www.victim.test."), rrtype::A, false), opts);
                if (r.header.id != id || r.answers.size() != 1) ++failures;
            } catch (const std::exception&) {
                ++failures;
            }
        }
    };
    std::thread a(client, 0, Transport::Udp);
    std::thread b(client, 20000, Transport::Udp);
    std::thread c(client, 40000, Transport::Tcp);
    a.join();
    b.join();
    c.join();
    EXPECT_EQ(failures.load(), 0);
}

TEST(Server, GarbageGetsFormErrOrSilence) {
    auto listener = serve(Endpoint{"127.0.0.1", 0}, small_tree());
    Bytes junk(14, 0);
    junk[0] = 0xAB;
    junk[1] = 0xCD;
    junk[5] = 1;  // claims one question, then runs out
    const DnsMessage r = decode_message(exchange_raw(listener->endpoint(), junk, Transport::Udp, std::chrono::seconds(2)));
    EXPECT_EQ(r.header.id, 0xABCD);
    EXPECT_EQ(r.header.rcode, rcode::FormErr);
    try {
        exchange_raw(listener->endpoint(), Bytes{1, 2, 3}, Transport::Udp, std::chrono::milliseconds(300));
        FAIL();
    } catch (const NetError& e) {
        EXPECT_EQ(e.code(), NetErrc::Timeout);
    }
}

TEST(Server, StoppedServerTimesOut) {
    auto listener = serve(Endpoint{"127.0.0.1", 0}, small_tree());
    const Endpoint ep = listener->endpoint();
    listener->stop();
    ClientOptions opts;
    opts.timeout = std::chrono::milliseconds(300);
    try {
        exchange(ep, make_query(1, DnsName::parse("www.victim.test."), rrtype::A, false), opts);
        FAIL();
    } catch (const NetError& e) {
        EXPECT_EQ(e.code(), NetErrc::Timeout);
    }
}

TEST(Server, BindConflictIsReported) {
    auto first = serve(Endpoint{"127.0.0.1", 0}, small_tree());
    try {
        serve(first->endpoint(), small_tree());
        FAIL();
    } catch (const NetError& e) {
        EXPECT_EQ(e.code(), NetErrc::BindFailure);
    }
    EXPECT_THROW(Endpoint::parse("localhost:53"), NetError);
    EXPECT_EQ(Endpoint::parse("127.0.0.1:5300").port, 5300);
    EXPECT_EQ(Endpoint::parse("10.1.2.3").port, 53);
}
