#ifndef RWNDQ_WORKLOAD_HPP
#define RWNDQ_WORKLOAD_HPP

#include <cstdint>
#include <vector>

#include "rwndq/net.hpp"
#include "rwndq/sim_time.hpp"

namespace rwndq {

struct IncastSpec {
    int n_senders = 1;
    std::int64_t block_size = 11500; // bytes per request
    int blocks_per_request = 1;      // consecutive requests per chain
    int parallel_connections = 1;    // concurrent chains per sender
    std::vector<double> epoch_times_s{0.0};
    double start_jitter_s = 0.001;
};

struct ElephantSpec {
    int n_flows = 0;
    double start_s = 0.0;
    double duration_s = 0.0;
};

// A chain models one benchmark client: `blocks` back-to-back requests, each
// carried by its own connection, the next one opening when the previous
// transfer is fully acknowledged.
struct ChainPlan {
    std::uint32_t sender_host = 0;
    std::uint32_t receiver_host = 0;
    std::int64_t block_size = 0;
    int blocks = 0;
    SimTime start = 0;
};

struct ElephantPlan {
    std::uint32_t sender_host = 0;
    std::uint32_t receiver_host = 0;
    SimTime start = 0;
    SimTime stop = 0;
};

// Builds the incast chains. Start jitter is drawn per chain from the seeded
// generator in a fixed order (epoch-major, then sender, then connection), so
// a seed pins the whole schedule.
std::vector<ChainPlan> gen_incast(const IncastSpec& spec, const Topology& topo,
                                  std::uint64_t seed);

// Long-lived flows on the sender hosts after the first `sender_offset` ones
// (so they do not share hosts with the incast senders).
std::vector<ElephantPlan> gen_elephants(const ElephantSpec& spec,
                                        const Topology& topo,
                                        int sender_offset);

// Uniform double in [0, 1) from a raw 64-bit draw; the documented jitter
// mapping (top 53 bits over 2^53).
double uniform_from_bits(std::uint64_t bits);

} // namespace rwndq

#endif
