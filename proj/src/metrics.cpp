#include "rwndq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rwndq {

FctStats fct_stats(std::span<const double> fcts) {
    if (fcts.empty()) {
        throw std::invalid_argument("fct_stats: no completed flows");
    }
    FctStats out;
    out.count = fcts.size();
    double sum = 0;
    for (double v : fcts) {
        sum += v;
        out.max = std::max(out.max, v);
    }
    out.avg = sum / static_cast<double>(fcts.size());
    double var = 0;
    for (double v : fcts) {
        var += (v - out.avg) * (v - out.avg);
    }
    var /= static_cast<double>(fcts.size());
    out.stddev = std::sqrt(var);

    std::vector<double> sorted(fcts.begin(), fcts.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(sorted.size())));
    rank = std::max<std::size_t>(rank, 1);
    out.p99 = sorted[rank - 1];
    return out;
}

double jain_index(std::span<const double> rates) {
    if (rates.empty()) {
        throw std::invalid_argument("jain_index: no rates");
    }
    double sum = 0;
    double sum_sq = 0;
    for (double r : rates) {
        if (r < 0) {
            throw std::invalid_argument("jain_index: negative rate");
        }
        sum += r;
        sum_sq += r * r;
    }
    if (sum_sq == 0) {
        throw std::invalid_argument("jain_index: all rates zero");
    }
    return (sum * sum) / (static_cast<double>(rates.size()) * sum_sq);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string flows_csv(std::span<const FlowRecord> flows) {
    std::string out = "flow_id,src,dst,class,start_s,fct_s,bytes,retransmissions\n";
    for (const FlowRecord& f : flows) {
        out += std::to_string(f.flow_id);
        out += ',';
        out += f.src;
        out += ',';
        out += f.dst;
        out += ',';
        out += f.elephant ? "elephant" : "mouse";
        out += ',';
        out += format_value(f.start_s);
        out += ',';
        if (f.fct_s) {
            out += format_value(*f.fct_s);
        }
        out += ',';
        out += std::to_string(f.bytes);
        out += ',';
        out += std::to_string(f.retransmissions);
        out += '\n';
    }
    return out;
}

std::string ports_csv(std::span<const PortRecord> ports) {
    std::string out = "port_id,drops,marks,mean_q_bytes,max_q_bytes\n";
    for (const PortRecord& p : ports) {
        out += p.port_id;
        out += ',';
        out += std::to_string(p.drops);
        out += ',';
        out += std::to_string(p.marks);
        out += ',';
        out += format_value(p.mean_q_bytes);
        out += ',';
        out += std::to_string(p.max_q_bytes);
        out += '\n';
    }
    return out;
}

std::string summary_csv(std::span<const SummaryEntry> entries) {
    std::string out = "metric,value\n";
    for (const SummaryEntry& e : entries) {
        out += e.metric;
        out += ',';
        out += e.value;
        out += '\n';
    }
    return out;
}

} // namespace rwndq
