#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "rwndq/config.hpp"
#include "rwndq/sim.hpp"

using namespace rwndq;

namespace {

ScenarioConfig scenario(const std::string& json) {
    return parse_scenario(json);
}

} // namespace

TEST_CASE("topology shapes and routing symmetry") {
    RwndqParams params;

    SUBCASE("minimal: two hosts, one switch") {
        TopologySpec spec;
        spec.racks = 1;
        spec.hosts_per_rack = 2;
        Topology topo(spec, AqmKind::droptail, params, EcnMarker());
        CHECK(topo.hosts().size() == 2);
        CHECK(topo.switches().size() == 1);
        CHECK(topo.ports().size() == 4); // both directions of both links
        CHECK(topo.sender_hosts().size() == 1);
        CHECK(topo.receiver_host() == 1);
    }

    SUBCASE("paper-scale leaf/core: 4 racks of 7") {
        TopologySpec spec;
        spec.racks = 4;
        spec.hosts_per_rack = 7;
        Topology topo(spec, AqmKind::rwndq, params, EcnMarker());
        CHECK(topo.hosts().size() == 28);
        CHECK(topo.switches().size() == 5); // 4 ToRs + core
        CHECK(topo.sender_hosts().size() == 21);
        CHECK(topo.receiver_host() == 21); // first host of the last rack

        // Every forward path reversed equals the reverse path.
        for (std::uint32_t s : topo.sender_hosts()) {
            auto forward = topo.path(s, topo.receiver_host());
            auto back = topo.path(topo.receiver_host(), s);
            std::reverse(back.begin(), back.end());
            CHECK(forward == back);
        }
    }

    SUBCASE("switch ports carry the AQM, host NICs stay plain") {
        TopologySpec spec;
        spec.racks = 2;
        spec.hosts_per_rack = 2;
        Topology topo(spec, AqmKind::rwndq, params, EcnMarker());
        for (const OutPort& port : topo.ports()) {
            if (port.switch_owned) {
                CHECK(port.aqm == AqmKind::rwndq);
                CHECK(port.rwndq.has_value());
                CHECK(port.capacity == spec.buffer_bytes);
            } else {
                CHECK(port.aqm == AqmKind::none);
                CHECK(port.capacity < 0);
            }
        }
    }
}

TEST_CASE("a single short flow completes with a sane FCT") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "droptail"},
      "topology": {"racks": 1, "hosts_per_rack": 2},
      "workload": {"incast": {"n_senders": 1, "blocks_per_request": 1,
                              "start_jitter_s": 0}},
      "duration_s": 1.0
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    CHECK(result.values.at("mice_completed") == 1);
    CHECK(result.values.at("checksum_violations") == 0);
    CHECK(result.values.at("stamp_violations") == 0);

    // 11.5 KB over 1 Gbps behind a 100 us RTT: finishes within a handful of
    // round trips, never less than one.
    double fct = result.values.at("mice_fct_avg_s");
    CHECK(fct > 100e-6);
    CHECK(fct < 5e-3);
    CHECK(result.flows_csv.find("mouse") != std::string::npos);
}

TEST_CASE("a lone elephant saturates the bottleneck") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "droptail"},
      "topology": {"racks": 2, "hosts_per_rack": 1},
      "workload": {"elephants": {"n_flows": 1, "duration_s": 0.5}},
      "metrics": {"goodput_window_s": [0.1, 0.5]},
      "duration_s": 0.5
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    // Application goodput clears 0.90 Gbps once headers are paid for.
    CHECK(result.values.at("elephant_goodput_mean_bps") >= 0.90e9);
    CHECK(result.values.at("elephant_goodput_jain") == doctest::Approx(1.0));
    CHECK(result.values.at("packets_injected") ==
          result.values.at("packets_delivered") +
              result.values.at("packets_dropped") +
              result.values.at("packets_in_flight"));
}

TEST_CASE("same seed reproduces every artifact byte for byte") {
    const char* json = R"({
      "aqm": {"type": "rwndq"},
      "topology": {"racks": 2, "hosts_per_rack": 4},
      "workload": {"incast": {"n_senders": 3, "blocks_per_request": 3},
                   "elephants": {"n_flows": 1, "duration_s": 0.2}},
      "seed": 1234,
      "duration_s": 2.0
    })");
    RunResult a = run_scenario(scenario(json), true);
    RunResult b = run_scenario(scenario(json), true);
    REQUIRE(a.status == kStatusOk);
    CHECK(a.flows_csv == b.flows_csv);
    CHECK(a.ports_csv == b.ports_csv);
    CHECK(a.summary_csv == b.summary_csv);
    CHECK(a.trace == b.trace);
    CHECK_FALSE(a.trace.empty());

    // A different seed moves the jitter but keeps the port table.
    ScenarioConfig reseeded = scenario(json);
    reseeded.seed = 4321;
    RunResult c = run_scenario(reseeded);
    CHECK(c.ports_csv.find("tor0->core") != std::string::npos);
    CHECK(a.flows_csv != c.flows_csv);
}

TEST_CASE("rwndq stamps ACKs and keeps both safety counters at zero") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "rwndq"},
      "topology": {"racks": 2, "hosts_per_rack": 8},
      "workload": {"elephants": {"n_flows": 4, "duration_s": 0.5}},
      "metrics": {"queue_window_s": [0.2, 0.5]},
      "duration_s": 0.5
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    CHECK(result.values.at("acks_seen") > 0);
    CHECK(result.values.at("acks_rewritten") > 0);
    CHECK(result.values.at("checksum_violations") == 0);
    CHECK(result.values.at("stamp_violations") == 0);
    CHECK(result.values.at("invalid_scale_acks") == 0);
}

TEST_CASE("rwndq holds the queue near the target while droptail bloats") {
    const char* base = R"({
      "aqm": {"type": "%s"},
      "topology": {"racks": 2, "hosts_per_rack": 4},
      "workload": {"elephants": {"n_flows": 4, "duration_s": 1.0}},
      "metrics": {"queue_window_s": [0.4, 1.0]},
      "duration_s": 1.0
    })";
    char buf[1024];
    std::snprintf(buf, sizeof(buf), base, "rwndq");
    RunResult rwndq_run = run_scenario(scenario(buf));
    std::snprintf(buf, sizeof(buf), base, "droptail");
    RunResult droptail_run = run_scenario(scenario(buf));
    REQUIRE(rwndq_run.status == kStatusOk);
    REQUIRE(droptail_run.status == kStatusOk);

    double target = 0.25 * 131072;
    double rwndq_q = rwndq_run.values.at("bottleneck_mean_q_bytes");
    double droptail_q = droptail_run.values.at("bottleneck_mean_q_bytes");
    CHECK(rwndq_q < 2 * target);
    CHECK(droptail_q > rwndq_q);
}

TEST_CASE("dctcp marking engages and reduces standing queues") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "ecn_dctcp"},
      "topology": {"racks": 2, "hosts_per_rack": 4},
      "sender": {"type": "dctcp"},
      "workload": {"elephants": {"n_flows": 4, "duration_s": 0.5}},
      "metrics": {"queue_window_s": [0.2, 0.5]},
      "duration_s": 0.5
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    CHECK(result.values.at("total_marks") > 0);
    CHECK(result.values.at("bottleneck_mean_q_bytes") < 131072 * 0.75);
}

TEST_CASE("sim_end truncates open flows without breaking conservation") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "droptail"},
      "topology": {"racks": 2, "hosts_per_rack": 2},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 5.0}},
      "duration_s": 0.05
    })");
    RunResult result = run_scenario(cfg);
    // Elephants never close inside 50 ms: no completions means deadlock
    // status with partial metrics still emitted.
    CHECK(result.status == kStatusDeadlock);
    CHECK(result.values.at("packets_injected") ==
          result.values.at("packets_delivered") +
              result.values.at("packets_dropped") +
              result.values.at("packets_in_flight"));
    CHECK(result.flows_csv.find("elephant") != std::string::npos);
}

TEST_CASE("departure-port stamping mode runs to completion") {
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "rwndq", "stamp_mode": "departure_port"},
      "topology": {"racks": 2, "hosts_per_rack": 4},
      "workload": {"incast": {"n_senders": 2, "blocks_per_request": 2}},
      "duration_s": 5.0
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    CHECK(result.values.at("mice_completed") == 2);
    CHECK(result.values.at("stamp_violations") == 0);
}

TEST_CASE("every delivered ACK respects the stamping port's window") {
    // Heavily loaded rwndq incast: plenty of rewrites, zero violations.
    ScenarioConfig cfg = scenario(R"({
      "aqm": {"type": "rwndq"},
      "topology": {"racks": 2, "hosts_per_rack": 16},
      "workload": {"incast": {"n_senders": 16, "blocks_per_request": 5}},
      "duration_s": 10.0
    })");
    RunResult result = run_scenario(cfg);
    REQUIRE(result.status == kStatusOk);
    CHECK(result.values.at("mice_completed") == 16);
    CHECK(result.values.at("acks_rewritten") > 0);
    CHECK(result.values.at("stamp_violations") == 0);
    CHECK(result.values.at("checksum_violations") == 0);
}
