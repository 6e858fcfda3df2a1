#include "rwndq/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace rwndq {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Strict object reader: every key must be consumed, the rest is an error.
class Obj {
  public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    ~Obj() = default;

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = get(key);
        if (v == nullptr) {
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        }
        return *v;
    }

    double number(const std::string& key, double def) {
        const json* v = get(key);
        if (v == nullptr) return def;
        if (!v->is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number");
        }
        return v->get<double>();
    }

    double required_number(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number");
        }
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t def) {
        const json* v = get(key);
        if (v == nullptr) return def;
        if (!v->is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v->get<std::int64_t>();
    }

    std::int64_t required_integer(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v.get<std::int64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = get(key);
        if (v == nullptr) return def;
        if (!v->is_boolean()) {
            throw ConfigError(path_ + "." + key + ": expected a boolean");
        }
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = get(key);
        if (v == nullptr) return def;
        if (!v->is_string()) {
            throw ConfigError(path_ + "." + key + ": expected a string");
        }
        return v->get<std::string>();
    }

    std::string required_string(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string()) {
            throw ConfigError(path_ + "." + key + ": expected a string");
        }
        return v.get<std::string>();
    }

    const std::string& path() const { return path_; }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
    if (!ok) {
        throw ConfigError(msg);
    }
}

std::pair<double, double> window_pair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
        throw ConfigError(path + ": expected [start_s, end_s]");
    }
    double a = v[0].get<double>();
    double b = v[1].get<double>();
    check(a >= 0 && b > a, path + ": window must satisfy 0 <= start < end");
    return {a, b};
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Obj root(doc, "config");
    ScenarioConfig cfg;

    {
        const json* t = root.get("topology");
        if (t != nullptr) {
            Obj o(*t, "topology");
            cfg.topology.racks =
                static_cast<int>(o.integer("racks", cfg.topology.racks));
            cfg.topology.hosts_per_rack = static_cast<int>(
                o.integer("hosts_per_rack", cfg.topology.hosts_per_rack));
            cfg.topology.link_rate_bps =
                o.integer("link_rate_bps", cfg.topology.link_rate_bps);
            cfg.topology.propagation = time_from_sec(o.number(
                "propagation_s", time_to_sec(cfg.topology.propagation)));
            cfg.topology.buffer_bytes =
                o.integer("buffer_bytes", cfg.topology.buffer_bytes);
            o.finish();
            check(cfg.topology.racks >= 1, "topology.racks: must be >= 1");
            check(cfg.topology.hosts_per_rack >= 1,
                  "topology.hosts_per_rack: must be >= 1");
            check(cfg.topology.link_rate_bps > 0,
                  "topology.link_rate_bps: must be > 0");
            check(cfg.topology.propagation >= 0,
                  "topology.propagation_s: must be >= 0");
            check(cfg.topology.buffer_bytes > 0,
                  "topology.buffer_bytes: must be > 0");
        }
    }

    {
        Obj o(root.require("aqm"), "aqm");
        std::string type = o.required_string("type");
        if (type == "droptail") {
            cfg.aqm.type = AqmType::droptail;
        } else if (type == "rwndq") {
            cfg.aqm.type = AqmType::rwndq;
        } else if (type == "ecn_dctcp") {
            cfg.aqm.type = AqmType::ecn_dctcp;
        } else {
            throw ConfigError("aqm.type: expected droptail, rwndq or ecn_dctcp");
        }
        cfg.aqm.alpha = o.number("alpha", cfg.aqm.alpha);
        cfg.aqm.t_s = o.number("t_s", cfg.aqm.t_s);
        cfg.aqm.m = static_cast<int>(o.integer("m", cfg.aqm.m));
        cfg.aqm.idle_timeout_s =
            o.number("idle_timeout_s", cfg.aqm.idle_timeout_s);
        cfg.aqm.min_window_bytes =
            o.integer("min_window_bytes", cfg.aqm.min_window_bytes);
        std::string mode = o.string("stamp_mode", "data_port");
        if (mode == "data_port") {
            cfg.aqm.stamp_mode = StampMode::data_port;
        } else if (mode == "departure_port") {
            cfg.aqm.stamp_mode = StampMode::departure_port;
        } else {
            throw ConfigError(
                "aqm.stamp_mode: expected data_port or departure_port");
        }
        cfg.aqm.threshold_fraction =
            o.number("threshold_fraction", cfg.aqm.threshold_fraction);
        cfg.aqm.ecn_use_avg = o.boolean("ecn_use_avg", cfg.aqm.ecn_use_avg);
        cfg.aqm.avg_sample_period_s =
            o.number("avg_sample_period_s", cfg.aqm.avg_sample_period_s);
        o.finish();
        check(cfg.aqm.alpha > 0 && cfg.aqm.alpha < 1,
              "aqm.alpha: must be in (0,1)");
        check(cfg.aqm.t_s > 0, "aqm.t_s: must be > 0");
        check(cfg.aqm.m >= 1, "aqm.m: must be >= 1");
        check(cfg.aqm.idle_timeout_s > 0, "aqm.idle_timeout_s: must be > 0");
        check(cfg.aqm.min_window_bytes >= 0,
              "aqm.min_window_bytes: must be >= 0");
        check(cfg.aqm.threshold_fraction > 0 && cfg.aqm.threshold_fraction <= 1,
              "aqm.threshold_fraction: must be in (0,1]");
        check(cfg.aqm.avg_sample_period_s > 0,
              "aqm.avg_sample_period_s: must be > 0");
        double target = cfg.aqm.alpha *
                        static_cast<double>(cfg.topology.buffer_bytes);
        check(static_cast<double>(cfg.aqm.min_window_bytes) <= target,
              "aqm.min_window_bytes: must not exceed alpha * buffer_bytes");
    }

    {
        Obj o(root.require("workload"), "workload");
        const json* inc = o.get("incast");
        if (inc != nullptr && !inc->is_null()) {
            Obj w(*inc, "workload.incast");
            IncastSpec spec;
            spec.n_senders = static_cast<int>(w.required_integer("n_senders"));
            spec.block_size = w.integer("block_size_bytes", spec.block_size);
            spec.blocks_per_request = static_cast<int>(
                w.integer("blocks_per_request", spec.blocks_per_request));
            spec.parallel_connections = static_cast<int>(
                w.integer("parallel_connections", spec.parallel_connections));
            if (const json* times = w.get("epoch_times_s")) {
                if (!times->is_array() || times->empty()) {
                    throw ConfigError(
                        "workload.incast.epoch_times_s: expected a non-empty "
                        "array of seconds");
                }
                spec.epoch_times_s.clear();
                for (const auto& t : *times) {
                    if (!t.is_number() || t.get<double>() < 0) {
                        throw ConfigError("workload.incast.epoch_times_s: "
                                          "entries must be numbers >= 0");
                    }
                    spec.epoch_times_s.push_back(t.get<double>());
                }
            }
            spec.start_jitter_s =
                w.number("start_jitter_s", spec.start_jitter_s);
            w.finish();
            check(spec.n_senders >= 1,
                  "workload.incast.n_senders: must be >= 1");
            check(spec.block_size > 0,
                  "workload.incast.block_size_bytes: must be > 0");
            check(spec.blocks_per_request >= 1,
                  "workload.incast.blocks_per_request: must be >= 1");
            check(spec.parallel_connections >= 1,
                  "workload.incast.parallel_connections: must be >= 1");
            check(spec.start_jitter_s >= 0,
                  "workload.incast.start_jitter_s: must be >= 0");
            cfg.incast = spec;
        }
        const json* ele = o.get("elephants");
        if (ele != nullptr && !ele->is_null()) {
            Obj w(*ele, "workload.elephants");
            ElephantSpec spec;
            spec.n_flows = static_cast<int>(w.required_integer("n_flows"));
            spec.start_s = w.number("start_s", spec.start_s);
            spec.duration_s = w.required_number("duration_s");
            w.finish();
            check(spec.n_flows >= 1,
                  "workload.elephants.n_flows: must be >= 1");
            check(spec.start_s >= 0,
                  "workload.elephants.start_s: must be >= 0");
            check(spec.duration_s > 0,
                  "workload.elephants.duration_s: must be > 0");
            cfg.elephants = spec;
        }
        o.finish();
        check(cfg.incast.has_value() || cfg.elephants.has_value(),
              "workload: needs at least one of incast, elephants");
    }

    {
        const json* s = root.get("sender");
        if (s != nullptr) {
            Obj o(*s, "sender");
            std::string type = o.string("type", "reno");
            if (type == "reno") {
                cfg.sender.kind = SenderKind::reno;
            } else if (type == "dctcp") {
                cfg.sender.kind = SenderKind::dctcp;
            } else {
                throw ConfigError("sender.type: expected reno or dctcp");
            }
            cfg.sender.mss_bytes = o.integer("mss_bytes", cfg.sender.mss_bytes);
            cfg.sender.init_cwnd_segments = static_cast<int>(o.integer(
                "init_cwnd_segments", cfg.sender.init_cwnd_segments));
            cfg.sender.rto_min_s = o.number("rto_min_s", cfg.sender.rto_min_s);
            cfg.sender.rto_initial_s =
                o.number("rto_initial_s", cfg.sender.rto_initial_s);
            cfg.sender.rto_max_s = o.number("rto_max_s", cfg.sender.rto_max_s);
            cfg.sender.rcv_buf_bytes =
                o.integer("rcv_buf_bytes", cfg.sender.rcv_buf_bytes);
            cfg.sender.dctcp_g = o.number("dctcp_g", cfg.sender.dctcp_g);
            o.finish();
            check(cfg.sender.mss_bytes > 0 &&
                      cfg.sender.mss_bytes <= kMtuBytes - kHeaderBytes,
                  "sender.mss_bytes: must be in (0, MTU - headers]");
            check(cfg.sender.init_cwnd_segments >= 1,
                  "sender.init_cwnd_segments: must be >= 1");
            check(cfg.sender.rto_min_s > 0, "sender.rto_min_s: must be > 0");
            check(cfg.sender.rto_initial_s >= cfg.sender.rto_min_s,
                  "sender.rto_initial_s: must be >= rto_min_s");
            check(cfg.sender.rto_max_s >= cfg.sender.rto_initial_s,
                  "sender.rto_max_s: must be >= rto_initial_s");
            check(cfg.sender.rcv_buf_bytes >= cfg.sender.mss_bytes,
                  "sender.rcv_buf_bytes: must hold at least one segment");
            check(cfg.sender.dctcp_g > 0 && cfg.sender.dctcp_g <= 1,
                  "sender.dctcp_g: must be in (0,1]");
        }
    }

    {
        std::int64_t scale = root.integer("window_scale", cfg.window_scale);
        check(scale >= 0 && scale <= kMaxWindowScale,
              "window_scale: must be in [0,14]");
        cfg.window_scale = static_cast<int>(scale);
        std::int64_t seed = root.integer("seed", 1);
        check(seed >= 0, "seed: must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.duration_s = root.required_number("duration_s");
        check(cfg.duration_s > 0, "duration_s: must be > 0");
    }

    {
        // Workload must fit the topology's sender pool (receivers live in
        // the last rack; a star keeps its last host as the receiver).
        std::int64_t sender_pool =
            cfg.topology.racks == 1
                ? cfg.topology.hosts_per_rack - 1
                : static_cast<std::int64_t>(cfg.topology.racks - 1) *
                      cfg.topology.hosts_per_rack;
        std::int64_t needed = 0;
        if (cfg.incast) needed += cfg.incast->n_senders;
        if (cfg.elephants) needed += cfg.elephants->n_flows;
        check(sender_pool >= 1, "topology: no sender hosts available");
        check(needed <= sender_pool,
              "workload: needs " + std::to_string(needed) +
                  " sender hosts but the topology provides " +
                  std::to_string(sender_pool));
    }

    {
        const json* m = root.get("metrics");
        if (m != nullptr) {
            Obj o(*m, "metrics");
            if (const json* g = o.get("goodput_window_s")) {
                cfg.metrics.goodput_window_s =
                    window_pair(*g, "metrics.goodput_window_s");
            }
            if (const json* q = o.get("queue_window_s")) {
                cfg.metrics.queue_window_s =
                    window_pair(*q, "metrics.queue_window_s");
            }
            o.finish();
        }
    }

    root.finish();
    return cfg;
}

std::string resolved_config_json(const ScenarioConfig& cfg) {
    ordered_json doc;
    doc["topology"] = {
        {"racks", cfg.topology.racks},
        {"hosts_per_rack", cfg.topology.hosts_per_rack},
        {"link_rate_bps", cfg.topology.link_rate_bps},
        {"propagation_s", time_to_sec(cfg.topology.propagation)},
        {"buffer_bytes", cfg.topology.buffer_bytes},
    };
    const char* aqm_type = cfg.aqm.type == AqmType::droptail ? "droptail"
                           : cfg.aqm.type == AqmType::rwndq  ? "rwndq"
                                                             : "ecn_dctcp";
    doc["aqm"] = {
        {"type", aqm_type},
        {"alpha", cfg.aqm.alpha},
        {"t_s", cfg.aqm.t_s},
        {"m", cfg.aqm.m},
        {"idle_timeout_s", cfg.aqm.idle_timeout_s},
        {"min_window_bytes", cfg.aqm.min_window_bytes},
        {"stamp_mode", cfg.aqm.stamp_mode == StampMode::data_port
                           ? "data_port"
                           : "departure_port"},
        {"threshold_fraction", cfg.aqm.threshold_fraction},
        {"ecn_use_avg", cfg.aqm.ecn_use_avg},
        {"avg_sample_period_s", cfg.aqm.avg_sample_period_s},
    };
    ordered_json workload = ordered_json::object();
    if (cfg.incast) {
        workload["incast"] = {
            {"n_senders", cfg.incast->n_senders},
            {"block_size_bytes", cfg.incast->block_size},
            {"blocks_per_request", cfg.incast->blocks_per_request},
            {"parallel_connections", cfg.incast->parallel_connections},
            {"epoch_times_s", cfg.incast->epoch_times_s},
            {"start_jitter_s", cfg.incast->start_jitter_s},
        };
    } else {
        workload["incast"] = nullptr;
    }
    if (cfg.elephants) {
        workload["elephants"] = {
            {"n_flows", cfg.elephants->n_flows},
            {"start_s", cfg.elephants->start_s},
            {"duration_s", cfg.elephants->duration_s},
        };
    } else {
        workload["elephants"] = nullptr;
    }
    doc["workload"] = workload;
    doc["sender"] = {
        {"type", cfg.sender.kind == SenderKind::reno ? "reno" : "dctcp"},
        {"mss_bytes", cfg.sender.mss_bytes},
        {"init_cwnd_segments", cfg.sender.init_cwnd_segments},
        {"rto_min_s", cfg.sender.rto_min_s},
        {"rto_initial_s", cfg.sender.rto_initial_s},
        {"rto_max_s", cfg.sender.rto_max_s},
        {"rcv_buf_bytes", cfg.sender.rcv_buf_bytes},
        {"dctcp_g", cfg.sender.dctcp_g},
    };
    doc["window_scale"] = cfg.window_scale;
    doc["seed"] = cfg.seed;
    doc["duration_s"] = cfg.duration_s;
    ordered_json metrics = ordered_json::object();
    auto goodput = cfg.metrics.goodput_window_s.value_or(
        std::make_pair(0.0, cfg.duration_s));
    auto queue = cfg.metrics.queue_window_s.value_or(
        std::make_pair(0.0, cfg.duration_s));
    metrics["goodput_window_s"] = {goodput.first, goodput.second};
    metrics["queue_window_s"] = {queue.first, queue.second};
    doc["metrics"] = metrics;
    return doc.dump(2) + "\n";
}

} // namespace rwndq
