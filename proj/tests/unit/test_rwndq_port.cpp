#include <doctest.h>

#include <cmath>
#include <random>

#include "rwndq/packet.hpp"
#include "rwndq/rwndq_port.hpp"

using namespace rwndq;

namespace {

RwndqParams params_with_target(std::int64_t buffer, double alpha,
                               std::int64_t min_window = 0) {
    RwndqParams p;
    p.buffer_bytes = buffer;
    p.target_occupancy = alpha;
    p.min_window_bytes = min_window;
    return p;
}

Packet data_packet(std::uint32_t payload) {
    Packet pkt;
    pkt.flow = FlowKey{1, 2, 3, 4};
    pkt.tcp.flags = tcpflag::ack;
    pkt.tcp.payload_len = payload;
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes + payload);
    pkt.size_on_wire = pkt.ip.total_len;
    set_checksums(pkt);
    return pkt;
}

Packet ack_packet(std::uint16_t field, int scale) {
    Packet pkt = data_packet(0);
    pkt.tcp.rwnd_field = field;
    set_checksums(pkt);
    if (scale > 0) {
        encode_scale(pkt, scale);
    }
    return pkt;
}

} // namespace

TEST_CASE("first flow takes the target queue level and enters slow start") {
    RwndqPortState port(params_with_target(100000, 0.25));
    port.on_timer_tick(100000); // leave slow start via a full-queue boundary
    for (int i = 0; i < 9; ++i) port.on_timer_tick(100000);
    CHECK_FALSE(port.in_slow_start());
    port.on_flow_open();
    CHECK(port.rwnd_bytes() == 25000);
    CHECK(port.flow_count() == 1);
    CHECK(port.in_slow_start());
}

TEST_CASE("each additional flow splits the shared window") {
    RwndqPortState port(params_with_target(100000, 0.24));
    port.on_flow_open();
    CHECK(port.rwnd_bytes() == 24000);
    port.on_flow_open();
    CHECK(port.rwnd_bytes() == 12000);
    CHECK(port.flow_count() == 2);

    RwndqPortState port2(params_with_target(100000, 0.36));
    for (int i = 0; i < 3; ++i) port2.on_flow_open();
    CHECK(port2.rwnd_bytes() == 12000);
    port2.on_flow_open();
    CHECK(port2.rwnd_bytes() == 9000);
    CHECK(port2.flow_count() == 4);
}

TEST_CASE("closing flows re-merges the shares") {
    RwndqPortState port(params_with_target(100000, 0.18));
    port.on_flow_open();
    port.on_flow_open(); // rwnd 9000, beta 2
    CHECK(port.rwnd_bytes() == 9000);
    CHECK(port.on_flow_close());
    CHECK(port.flow_count() == 1);
    CHECK(port.rwnd_bytes() == 18000);
    CHECK(port.on_flow_close());
    CHECK(port.flow_count() == 0);
    CHECK(port.rwnd_bytes() == 18000); // back to alpha * B
    CHECK(port.in_slow_start());
}

TEST_CASE("duplicate close underflows without going negative") {
    RwndqPortState port(params_with_target(100000, 0.25));
    CHECK_FALSE(port.on_flow_close());
    CHECK(port.flow_count() == 0);
    CHECK(port.close_underflows == 1);
}

TEST_CASE("matched churn conserves the window to within a byte") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        RwndqPortState port(params_with_target(131072, 0.25));
        port.on_flow_open();
        std::int64_t before = port.rwnd_bytes();
        int depth = 0;
        std::vector<int> pendings;
        for (int step = 0; step < 200; ++step) {
            if (depth > 0 && (rng() & 1)) {
                port.on_flow_close();
                depth -= 1;
            } else {
                port.on_flow_open();
                depth += 1;
            }
        }
        while (depth-- > 0) {
            port.on_flow_close();
        }
        CHECK(port.flow_count() == 1);
        CHECK(std::llabs(port.rwnd_bytes() - before) <= 1);
    }
}

TEST_CASE("timer tick accumulates the occupancy drift") {
    RwndqParams p = params_with_target(131072, 0.25);
    RwndqPortState port(p);
    port.on_data_packet(data_packet(1460), 0);
    std::int64_t target = port.target_bytes();

    SUBCASE("zero deviation leaves gamma untouched") {
        port.on_timer_tick(target);
        CHECK(port.gamma_fx() == 0);
    }
    SUBCASE("an empty queue adds MSS/M per tick") {
        port.on_timer_tick(0);
        CHECK(port.gamma_fx() == (146 << RwndqPortState::kFracBits));
    }
    SUBCASE("twice the target drains MSS/M per tick") {
        port.on_timer_tick(2 * target);
        CHECK(port.gamma_fx() == -(146 << RwndqPortState::kFracBits));
    }
}

TEST_CASE("window update adds gamma split across the flows") {
    RwndqPortState port(params_with_target(100000, 0.25));
    Packet data = data_packet(1460);
    port.on_data_packet(data, 0);
    port.on_flow_open();
    port.on_flow_open(); // beta 2, rwnd 12500
    CHECK(port.rwnd_bytes() == 12500);

    // Full interval at the target: exits slow start at the boundary and
    // takes the final slow-start increment of 2 MSS.
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick(port.target_bytes());
    }
    CHECK_FALSE(port.in_slow_start());
    CHECK(port.rwnd_bytes() == 12500 + 2 * 1460);

    // Empty queue for a full interval: gamma = MSS, each flow gets MSS/2.
    for (int i = 0; i < 10; ++i) {
        port.on_timer_tick(0);
    }
    CHECK(port.rwnd_bytes() == 12500 + 2 * 1460 + 730);
}

TEST_CASE("queue at target is a fixed point outside slow start") {
    RwndqPortState port(params_with_target(131072, 0.25));
    port.on_data_packet(data_packet(1460), 0);
    port.on_flow_open();
    for (int i = 0; i < 10; ++i) port.on_timer_tick(port.target_bytes());
    CHECK_FALSE(port.in_slow_start());
    std::int64_t settled = port.rwnd_bytes();
    for (int i = 0; i < 50; ++i) {
        port.on_timer_tick(port.target_bytes());
    }
    CHECK(port.rwnd_bytes() == settled);
}

TEST_CASE("window moves with the sign of the deviation") {
    RwndqPortState port(params_with_target(131072, 0.25));
    port.on_data_packet(data_packet(1460), 0);
    port.on_flow_open();
    for (int i = 0; i < 10; ++i) port.on_timer_tick(port.target_bytes());
    CHECK_FALSE(port.in_slow_start());

    std::int64_t before = port.rwnd_bytes();
    for (int i = 0; i < 10; ++i) port.on_timer_tick(0);
    CHECK(port.rwnd_bytes() >= before);

    before = port.rwnd_bytes();
    for (int i = 0; i < 10; ++i) port.on_timer_tick(2 * port.target_bytes());
    CHECK(port.rwnd_bytes() <= before);
}

TEST_CASE("slow start exits exactly at the first on-target update boundary") {
    RwndqPortState port(params_with_target(131072, 0.25));
    port.on_data_packet(data_packet(1460), 0);
    port.on_flow_open();
    CHECK(port.in_slow_start());
    // Queue crosses the target mid-interval: the flag survives until the
    // M-th tick closes the interval.
    for (int i = 0; i < 9; ++i) {
        port.on_timer_tick(port.target_bytes() + 1000);
        CHECK(port.in_slow_start());
    }
    port.on_timer_tick(port.target_bytes() + 1000);
    CHECK_FALSE(port.in_slow_start());
}

TEST_CASE("update interval with no flows skips the division") {
    RwndqPortState port(params_with_target(131072, 0.25));
    port.on_data_packet(data_packet(1460), 0);
    for (int i = 0; i < 10; ++i) port.on_timer_tick(2 * port.target_bytes());
    CHECK_FALSE(port.in_slow_start());
    std::int64_t before = port.rwnd_bytes();
    for (int i = 0; i < 10; ++i) port.on_timer_tick(0); // beta == 0
    CHECK(port.rwnd_bytes() == before);
}

TEST_CASE("window floor holds under heavy flow counts") {
    RwndqParams p = params_with_target(131072, 0.25, 1460);
    RwndqPortState port(p);
    for (int i = 0; i < 500; ++i) {
        port.on_flow_open();
    }
    CHECK(port.rwnd_bytes() >= 1460);
    port.on_data_packet(data_packet(1460), 0);
    for (int i = 0; i < 10; ++i) port.on_timer_tick(131072);
    CHECK(port.rwnd_bytes() >= 1460);
}

TEST_CASE("stamp_ack rewrites only when the local window is smaller") {
    SUBCASE("cap wins over a wide-open field") {
        RwndqPortState port(params_with_target(32000, 0.25));
        port.on_flow_open(); // rwnd 8000
        Packet pkt = ack_packet(65535, 0);
        StampResult res = port.stamp_ack(pkt);
        CHECK(res.outcome == StampOutcome::rewritten);
        CHECK(pkt.tcp.rwnd_field == 8000);
        CHECK(tcp_checksum_valid(pkt));
    }
    SUBCASE("a narrower receiver window passes through") {
        RwndqPortState port(params_with_target(400000, 0.25));
        port.on_flow_open(); // rwnd 100000
        Packet pkt = ack_packet(1000, 0);
        StampResult res = port.stamp_ack(pkt);
        CHECK(res.outcome == StampOutcome::unchanged);
        CHECK(pkt.tcp.rwnd_field == 1000);
        CHECK(tcp_checksum_valid(pkt));
    }
    SUBCASE("the stamped field respects the carrier scale") {
        RwndqPortState port(params_with_target(32000, 0.25));
        port.on_flow_open(); // rwnd 8000
        Packet pkt = ack_packet(65535, 2);
        StampResult res = port.stamp_ack(pkt);
        CHECK(res.outcome == StampOutcome::rewritten);
        CHECK(res.scale == 2);
        CHECK(pkt.tcp.rwnd_field == 2000);
        CHECK(pkt.tcp.reserved == 0);
        CHECK(tcp_checksum_valid(pkt));
    }
    SUBCASE("corrupt carrier counts and falls back to scale zero") {
        RwndqPortState port(params_with_target(32000, 0.25));
        port.on_flow_open();
        Packet pkt = ack_packet(65535, 0);
        pkt.tcp.reserved = 15;
        set_checksums(pkt);
        StampResult res = port.stamp_ack(pkt);
        CHECK_FALSE(res.scale_valid);
        CHECK(res.scale == 0);
        CHECK(pkt.tcp.rwnd_field == 8000);
        CHECK(port.invalid_scale_count == 1);
        CHECK(tcp_checksum_valid(pkt));
    }
}

TEST_CASE("stamping never widens the effective window") {
    std::mt19937_64 rng(4242);
    RwndqPortState port(params_with_target(131072, 0.25, 1460));
    port.on_flow_open();
    for (int trial = 0; trial < 5000; ++trial) {
        if ((rng() & 7) == 0) port.on_flow_open();
        if ((rng() & 7) == 1) port.on_flow_close();
        int scale = static_cast<int>(rng() % 15);
        std::uint16_t field = static_cast<std::uint16_t>(rng());
        Packet pkt = ack_packet(field, scale);
        std::int64_t before = effective_window(field, scale);
        StampResult res = port.stamp_ack(pkt);
        std::int64_t after = effective_window(pkt.tcp.rwnd_field, res.scale);
        CHECK(after <= before);
        CHECK(after <= std::max(port.rwnd_bytes(), before));
        CHECK(tcp_checksum_valid(pkt));
    }
}

TEST_CASE("payload tracking keeps the running maximum") {
    RwndqPortState port(params_with_target(131072, 0.25));
    port.on_data_packet(data_packet(512), 10);
    CHECK(port.max_payload_seen() == 512);
    port.on_data_packet(data_packet(1460), 20);
    port.on_data_packet(data_packet(512), 30);
    CHECK(port.max_payload_seen() == 1460);
    port.on_data_packet(data_packet(0), 40); // pure ACK: ignored
    CHECK(port.max_payload_seen() == 1460);
}

TEST_CASE("idle timeout resets the flow count") {
    RwndqParams p = params_with_target(131072, 0.25);
    RwndqPortState port(p);
    for (int i = 0; i < 5; ++i) port.on_flow_open();
    port.on_data_packet(data_packet(1460), 0);

    SUBCASE("a quiet second clears everything") {
        CHECK(port.on_idle_check(time_from_sec(1.0)));
        CHECK(port.flow_count() == 0);
        CHECK(port.rwnd_bytes() == port.target_bytes());
        CHECK(port.in_slow_start());
    }
    SUBCASE("active traffic keeps the count") {
        port.on_data_packet(data_packet(1460), time_from_ms(900));
        CHECK_FALSE(port.on_idle_check(time_from_sec(1.0)));
        CHECK(port.flow_count() == 5);
    }
    SUBCASE("idempotent at zero flows") {
        CHECK(port.on_idle_check(time_from_sec(1.0)));
        CHECK_FALSE(port.on_idle_check(time_from_sec(2.0)));
        CHECK(port.flow_count() == 0);
    }
}

TEST_CASE("flow count tracks a brute-force reference over random traces") {
    std::mt19937_64 rng(2024);
    RwndqParams p = params_with_target(131072, 0.25);
    SimTime idle = p.idle_timeout;

    for (int trace = 0; trace < 200; ++trace) {
        RwndqPortState port(p);
        int ref_beta = 0;
        SimTime ref_last_data = 0;
        SimTime now = 0;
        int events = 50;
        for (int i = 0; i < events; ++i) {
            now += static_cast<SimTime>(rng() % (2 * idle / events));
            switch (rng() % 4) {
            case 0:
                port.on_flow_open();
                ref_beta += 1;
                break;
            case 1:
                port.on_flow_close();
                if (ref_beta > 0) ref_beta -= 1;
                break;
            case 2:
                port.on_data_packet(data_packet(1460), now);
                ref_last_data = now;
                break;
            case 3:
                port.on_idle_check(now);
                if (ref_beta > 0 && now - ref_last_data >= idle) {
                    ref_beta = 0;
                }
                break;
            }
            REQUIRE(port.flow_count() == ref_beta);
        }
    }
}
