#ifndef RWNDQ_SIM_HPP
#define RWNDQ_SIM_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rwndq/config.hpp"
#include "rwndq/event.hpp"
#include "rwndq/metrics.hpp"
#include "rwndq/net.hpp"
#include "rwndq/workload.hpp"

namespace rwndq {

// Process-style status codes, shared with the C API and the CLI exit codes.
enum RunStatus : int {
    kStatusOk = 0,
    kStatusConfigError = 2,
    kStatusDeadlock = 3,
    kStatusInvariant = 4,
};

struct RunResult {
    int status = kStatusOk;
    std::string error;
    std::string resolved_config;
    std::string flows_csv;
    std::string ports_csv;
    std::string summary_csv;
    std::string trace;
    // Numeric summary metrics keyed as in summary.csv.
    std::map<std::string, double> values;
    std::map<std::string, std::string> text_values;
};

// One scenario, one deterministic single-threaded event loop. Separate
// instances share nothing and may run on different threads.
class Simulation {
  public:
    explicit Simulation(const ScenarioConfig& cfg);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void enable_trace(bool on);
    RunResult run();

    // Engine internals exposed for the test suites.
    Topology& topology();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

RunResult run_scenario(const ScenarioConfig& cfg, bool trace = false);

} // namespace rwndq

#endif
