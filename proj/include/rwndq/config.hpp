#ifndef RWNDQ_CONFIG_HPP
#define RWNDQ_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "rwndq/net.hpp"
#include "rwndq/rwndq_port.hpp"
#include "rwndq/tcp.hpp"
#include "rwndq/workload.hpp"

namespace rwndq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AqmType { droptail, rwndq, ecn_dctcp };

struct AqmConfig {
    AqmType type = AqmType::droptail;
    double alpha = 0.25;
    double t_s = 100e-6;
    int m = 10;
    double idle_timeout_s = 1.0;
    std::int64_t min_window_bytes = kDefaultMss;
    StampMode stamp_mode = StampMode::data_port;
    double threshold_fraction = 0.25;
    bool ecn_use_avg = false;
    double avg_sample_period_s = 48e-6;
};

struct SenderSettings {
    SenderKind kind = SenderKind::reno;
    std::int64_t mss_bytes = kDefaultMss;
    int init_cwnd_segments = 10;
    double rto_min_s = 0.2;
    double rto_initial_s = 1.0;
    double rto_max_s = 60.0;
    std::int64_t rcv_buf_bytes = 256 * 1024;
    double dctcp_g = 1.0 / 16.0;
};

struct MetricsConfig {
    // Defaults to the whole run when unset.
    std::optional<std::pair<double, double>> goodput_window_s;
    std::optional<std::pair<double, double>> queue_window_s;
};

struct ScenarioConfig {
    TopologySpec topology;
    AqmConfig aqm;
    std::optional<IncastSpec> incast;
    std::optional<ElephantSpec> elephants;
    SenderSettings sender;
    int window_scale = 2;
    std::uint64_t seed = 1;
    double duration_s = 0;
    MetricsConfig metrics;
};

// Parses and validates a scenario document. Unknown keys, missing required
// keys, and out-of-range values raise ConfigError naming the offending key.
ScenarioConfig parse_scenario(const std::string& json_text);

// The fully resolved document: every default explicit, stable key order.
// Regenerable byte-identically from the same inputs.
std::string resolved_config_json(const ScenarioConfig& cfg);

} // namespace rwndq

#endif
