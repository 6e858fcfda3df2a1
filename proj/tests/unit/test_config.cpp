#include <doctest.h>

#include <string>

#include "rwndq/config.hpp"

using namespace rwndq;

namespace {

const char* kMinimal = R"({
  "aqm": {"type": "rwndq"},
  "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}},
  "duration_s": 1.0
})";

} // namespace

TEST_CASE("minimal config parses with documented defaults") {
    ScenarioConfig cfg = parse_scenario(kMinimal);
    CHECK(cfg.aqm.type == AqmType::rwndq);
    CHECK(cfg.aqm.alpha == doctest::Approx(0.25));
    CHECK(cfg.aqm.t_s == doctest::Approx(100e-6));
    CHECK(cfg.aqm.m == 10);
    CHECK(cfg.aqm.stamp_mode == StampMode::data_port);
    CHECK(cfg.topology.racks == 2);
    CHECK(cfg.topology.hosts_per_rack == 16);
    CHECK(cfg.topology.buffer_bytes == 131072);
    CHECK(cfg.window_scale == 2);
    CHECK(cfg.sender.kind == SenderKind::reno);
    CHECK(cfg.seed == 1);
    CHECK_FALSE(cfg.incast.has_value());
    REQUIRE(cfg.elephants.has_value());
    CHECK(cfg.elephants->n_flows == 2);
}

TEST_CASE("unknown keys are rejected by name") {
    std::string bad = R"({
      "aqm": {"type": "rwndq", "alhpa": 0.3},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}},
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad),
                         doctest::Contains("alhpa"), ConfigError);
}

TEST_CASE("missing required keys are reported by name") {
    std::string no_duration = R"({
      "aqm": {"type": "rwndq"},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(no_duration),
                         doctest::Contains("duration_s"), ConfigError);

    std::string no_type = R"({
      "aqm": {},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}},
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(no_type), doctest::Contains("type"),
                         ConfigError);
}

TEST_CASE("range validation names the offending key") {
    std::string bad_alpha = R"({
      "aqm": {"type": "rwndq", "alpha": 1.5},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}},
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_alpha),
                         doctest::Contains("alpha"), ConfigError);

    std::string bad_scale = R"({
      "aqm": {"type": "droptail"},
      "workload": {"elephants": {"n_flows": 2, "duration_s": 1.0}},
      "window_scale": 15,
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_scale),
                         doctest::Contains("window_scale"), ConfigError);
}

TEST_CASE("workload must exist and fit the topology") {
    std::string empty = R"({
      "aqm": {"type": "droptail"},
      "workload": {},
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(empty), doctest::Contains("workload"),
                         ConfigError);

    std::string too_big = R"({
      "aqm": {"type": "droptail"},
      "topology": {"racks": 2, "hosts_per_rack": 4},
      "workload": {"incast": {"n_senders": 3},
                   "elephants": {"n_flows": 2, "duration_s": 1.0}},
      "duration_s": 1.0
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(too_big),
                         doctest::Contains("sender hosts"), ConfigError);
}

TEST_CASE("resolved config is explicit and reproducible") {
    ScenarioConfig cfg = parse_scenario(kMinimal);
    std::string a = resolved_config_json(cfg);
    std::string b = resolved_config_json(cfg);
    CHECK(a == b);
    // Defaults appear explicitly.
    CHECK(a.find("\"stamp_mode\": \"data_port\"") != std::string::npos);
    CHECK(a.find("\"min_window_bytes\": 1460") != std::string::npos);
    CHECK(a.find("\"seed\": 1") != std::string::npos);
    CHECK(a.find("\"goodput_window_s\"") != std::string::npos);

    // Re-parsing the resolved document is a fixed point.
    ScenarioConfig reparsed = parse_scenario(a);
    CHECK(resolved_config_json(reparsed) == a);
}

TEST_CASE("seed override changes only the seed") {
    ScenarioConfig cfg = parse_scenario(kMinimal);
    cfg.seed = 99;
    std::string resolved = resolved_config_json(cfg);
    CHECK(resolved.find("\"seed\": 99") != std::string::npos);
}
