#include <doctest.h>

#include <deque>
#include <random>

#include "rwndq/aqm.hpp"

using namespace rwndq;

namespace {

Packet ect_packet(EcnCodepoint ecn) {
    Packet pkt;
    pkt.flow = FlowKey{1, 2, 3, 4};
    pkt.tcp.flags = tcpflag::ack;
    pkt.tcp.payload_len = 1460;
    pkt.ip.ecn = ecn;
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes + 1460);
    pkt.size_on_wire = pkt.ip.total_len;
    set_checksums(pkt);
    return pkt;
}

} // namespace

TEST_CASE("droptail admits until the buffer is exactly full") {
    CHECK(droptail_admit(0, 1000, 100) == AdmitDecision::enqueue);
    CHECK(droptail_admit(1000, 1000, 100) == AdmitDecision::drop);
    CHECK(droptail_admit(900, 1000, 100) == AdmitDecision::enqueue);
    CHECK(droptail_admit(901, 1000, 100) == AdmitDecision::drop);
}

TEST_CASE("avg32 of a constant input is the constant") {
    RunningAvg32 avg(time_from_us(48));
    SimTime t = 0;
    std::int64_t mean = 0;
    for (int i = 0; i < 32; ++i) {
        mean = avg.update(1000, t);
        t += time_from_us(48);
    }
    CHECK(mean == 1000);
}

TEST_CASE("avg32 of an alternating input is the midpoint") {
    RunningAvg32 avg(time_from_us(48));
    SimTime t = 0;
    std::int64_t mean = 0;
    for (int i = 0; i < 32; ++i) {
        mean = avg.update(i % 2 == 0 ? 0 : 2000, t);
        t += time_from_us(48);
    }
    CHECK(mean == 1000);
}

TEST_CASE("avg32 matches a brute-force mean of the last 32 samples") {
    std::mt19937_64 rng(11);
    RunningAvg32 avg(time_from_us(48));
    std::deque<std::int64_t> window;
    SimTime t = 0;
    for (int i = 0; i < 500; ++i) {
        std::int64_t q = static_cast<std::int64_t>(rng() % 131072);
        std::int64_t got = avg.update(q, t);
        window.push_back(q);
        if (window.size() > 32) {
            window.pop_front();
        }
        std::int64_t sum = 0;
        for (std::int64_t v : window) sum += v;
        CHECK(got == sum / static_cast<std::int64_t>(window.size()));
        t += time_from_us(48);
    }
}

TEST_CASE("avg32 samples at most once per period") {
    RunningAvg32 avg(time_from_us(48));
    avg.update(100, 0);
    avg.update(900000, time_from_us(10)); // within the period: not sampled
    CHECK(avg.sample_count() == 1);
    CHECK(avg.average() == 100);
    avg.update(300, time_from_us(48));
    CHECK(avg.sample_count() == 2);
    CHECK(avg.average() == 200);
}

TEST_CASE("ecn marker follows the threshold rule") {
    std::int64_t capacity = 100000;
    EcnMarker marker(0.25, false, time_from_us(48));

    SUBCASE("above threshold marks ECT traffic") {
        Packet pkt = ect_packet(EcnCodepoint::ect0);
        CHECK(marker.maybe_mark(pkt, 30000, capacity, 0));
        CHECK(pkt.ip.ecn == EcnCodepoint::ce);
        CHECK(ip_checksum_valid(pkt));
    }
    SUBCASE("below threshold leaves the packet alone") {
        Packet pkt = ect_packet(EcnCodepoint::ect0);
        CHECK_FALSE(marker.maybe_mark(pkt, 10000, capacity, 0));
        CHECK(pkt.ip.ecn == EcnCodepoint::ect0);
    }
    SUBCASE("not-ECT traffic is never marked") {
        Packet pkt = ect_packet(EcnCodepoint::not_ect);
        CHECK_FALSE(marker.maybe_mark(pkt, capacity, capacity, 0));
        CHECK(pkt.ip.ecn == EcnCodepoint::not_ect);
        CHECK(ip_checksum_valid(pkt));
    }
}

TEST_CASE("ecn marker can gate on the 32-sample average") {
    std::int64_t capacity = 100000;
    EcnMarker marker(0.25, true, time_from_us(48));
    Packet pkt = ect_packet(EcnCodepoint::ect0);
    // One low sample keeps the average below threshold even if the
    // instantaneous queue is above it.
    CHECK_FALSE(marker.maybe_mark(pkt, 0, capacity, 0));
    CHECK_FALSE(marker.maybe_mark(pkt, 90000, capacity, time_from_us(10)));
    CHECK(pkt.ip.ecn == EcnCodepoint::ect0);
}
