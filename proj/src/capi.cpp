#include "rwndq/rwndq_c.h"

#include <exception>
#include <string>

#include "rwndq/config.hpp"
#include "rwndq/sim.hpp"

namespace {

thread_local std::string g_last_error = "";

void set_error(const std::string& msg) { g_last_error = msg; }

} // namespace

struct rwndq_sim {
    rwndq::ScenarioConfig config;
    bool trace = false;
    bool ran = false;
    rwndq::RunResult result;
    std::string resolved_preview;
};

extern "C" {

const char* rwndq_version(void) { return "0.1.0"; }

const char* rwndq_last_error(void) { return g_last_error.c_str(); }

rwndq_status rwndq_sim_create(const char* config_json, rwndq_sim** out) {
    if (out == nullptr) {
        set_error("out handle pointer is null");
        return RWNDQ_ERR_ARG;
    }
    *out = nullptr;
    if (config_json == nullptr) {
        set_error("config_json is null");
        return RWNDQ_ERR_ARG;
    }
    try {
        auto sim = new rwndq_sim;
        sim->config = rwndq::parse_scenario(config_json);
        sim->resolved_preview = rwndq::resolved_config_json(sim->config);
        *out = sim;
        return RWNDQ_OK;
    } catch (const rwndq::ConfigError& e) {
        set_error(e.what());
        return RWNDQ_ERR_CONFIG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RWNDQ_ERR_CONFIG;
    }
}

void rwndq_sim_destroy(rwndq_sim* sim) { delete sim; }

rwndq_status rwndq_sim_set_seed(rwndq_sim* sim, uint64_t seed) {
    if (sim == nullptr) {
        set_error("null handle");
        return RWNDQ_ERR_ARG;
    }
    if (sim->ran) {
        set_error("seed must be set before the run");
        return RWNDQ_ERR_STATE;
    }
    sim->config.seed = seed;
    sim->resolved_preview = rwndq::resolved_config_json(sim->config);
    return RWNDQ_OK;
}

rwndq_status rwndq_sim_set_trace(rwndq_sim* sim, int enabled) {
    if (sim == nullptr) {
        set_error("null handle");
        return RWNDQ_ERR_ARG;
    }
    if (sim->ran) {
        set_error("trace must be enabled before the run");
        return RWNDQ_ERR_STATE;
    }
    sim->trace = enabled != 0;
    return RWNDQ_OK;
}

rwndq_status rwndq_sim_run(rwndq_sim* sim) {
    if (sim == nullptr) {
        set_error("null handle");
        return RWNDQ_ERR_ARG;
    }
    if (sim->ran) {
        set_error("handle already ran; create a new one per run");
        return RWNDQ_ERR_STATE;
    }
    try {
        sim->result = rwndq::run_scenario(sim->config, sim->trace);
        sim->ran = true;
        switch (sim->result.status) {
        case rwndq::kStatusOk:
            return RWNDQ_OK;
        case rwndq::kStatusDeadlock:
            set_error(sim->result.error);
            return RWNDQ_ERR_DEADLOCK;
        default:
            set_error(sim->result.error);
            return RWNDQ_ERR_INTERNAL;
        }
    } catch (const std::exception& e) {
        set_error(e.what());
        return RWNDQ_ERR_INTERNAL;
    }
}

const char* rwndq_sim_artifact(const rwndq_sim* sim, rwndq_artifact which) {
    if (sim == nullptr) {
        set_error("null handle");
        return nullptr;
    }
    if (which == RWNDQ_RESOLVED_CONFIG) {
        return sim->ran ? sim->result.resolved_config.c_str()
                        : sim->resolved_preview.c_str();
    }
    if (!sim->ran) {
        set_error("artifacts are available after rwndq_sim_run");
        return nullptr;
    }
    switch (which) {
    case RWNDQ_CSV_FLOWS:
        return sim->result.flows_csv.c_str();
    case RWNDQ_CSV_PORTS:
        return sim->result.ports_csv.c_str();
    case RWNDQ_CSV_SUMMARY:
        return sim->result.summary_csv.c_str();
    case RWNDQ_TRACE:
        return sim->result.trace.c_str();
    default:
        set_error("unknown artifact");
        return nullptr;
    }
}

rwndq_status rwndq_sim_summary_value(const rwndq_sim* sim, const char* metric,
                                     double* out) {
    if (sim == nullptr || metric == nullptr || out == nullptr) {
        set_error("null argument");
        return RWNDQ_ERR_ARG;
    }
    if (!sim->ran) {
        set_error("summary values are available after rwndq_sim_run");
        return RWNDQ_ERR_STATE;
    }
    auto it = sim->result.values.find(metric);
    if (it == sim->result.values.end()) {
        set_error(std::string("no numeric summary metric named '") + metric +
                  "'");
        return RWNDQ_ERR_ARG;
    }
    *out = it->second;
    return RWNDQ_OK;
}

} // extern "C"
