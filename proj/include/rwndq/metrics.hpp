#ifndef RWNDQ_METRICS_HPP
#define RWNDQ_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rwndq {

struct FctStats {
    double avg = 0;
    double stddev = 0;
    double max = 0;
    double p99 = 0; // nearest-rank percentile
    std::size_t count = 0;
};

// Statistics over completed flows; throws std::invalid_argument when empty
// (no completions means the scenario deadlocked).
FctStats fct_stats(std::span<const double> fcts);

// (sum x)^2 / (n * sum x^2); throws when empty or all-zero.
double jain_index(std::span<const double> rates);

struct FlowRecord {
    std::uint32_t flow_id = 0;
    std::string src;
    std::string dst;
    bool elephant = false;
    double start_s = 0;
    std::optional<double> fct_s; // empty when the flow never finished
    std::uint64_t bytes = 0;     // payload delivered to the application
    std::uint64_t retransmissions = 0;
};

struct PortRecord {
    std::string port_id;
    std::uint64_t drops = 0;
    std::uint64_t marks = 0;
    double mean_q_bytes = 0;
    std::int64_t max_q_bytes = 0;
};

struct SummaryEntry {
    std::string metric;
    std::string value; // preformatted; empty when undefined
    std::optional<double> numeric;
};

// Fixed-format float used everywhere in emitted CSVs: 9 significant digits,
// C locale.
std::string format_value(double v);

std::string flows_csv(std::span<const FlowRecord> flows);
std::string ports_csv(std::span<const PortRecord> ports);
std::string summary_csv(std::span<const SummaryEntry> entries);

} // namespace rwndq

#endif
