#include "rwndq/workload.hpp"

#include <random>
#include <stdexcept>

namespace rwndq {

double uniform_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<ChainPlan> gen_incast(const IncastSpec& spec, const Topology& topo,
                                  std::uint64_t seed) {
    if (spec.n_senders < 1 || spec.block_size <= 0 ||
        spec.blocks_per_request < 1 || spec.parallel_connections < 1) {
        throw std::invalid_argument("incast spec out of range");
    }
    if (static_cast<std::size_t>(spec.n_senders) >
        topo.sender_hosts().size()) {
        throw std::invalid_argument("incast needs more sender hosts than the "
                                    "topology provides");
    }
    std::mt19937_64 rng(seed);
    std::vector<ChainPlan> chains;
    for (double epoch_s : spec.epoch_times_s) {
        SimTime epoch = time_from_sec(epoch_s);
        for (int s = 0; s < spec.n_senders; ++s) {
            for (int k = 0; k < spec.parallel_connections; ++k) {
                double jitter = uniform_from_bits(rng()) * spec.start_jitter_s;
                ChainPlan chain;
                chain.sender_host = topo.sender_hosts()[s];
                chain.receiver_host = topo.receiver_host();
                chain.block_size = spec.block_size;
                chain.blocks = spec.blocks_per_request;
                chain.start = epoch + time_from_sec(jitter);
                chains.push_back(chain);
            }
        }
    }
    return chains;
}

std::vector<ElephantPlan> gen_elephants(const ElephantSpec& spec,
                                        const Topology& topo,
                                        int sender_offset) {
    if (spec.n_flows < 0 || (spec.n_flows > 0 && spec.duration_s <= 0)) {
        throw std::invalid_argument("elephant spec out of range");
    }
    if (static_cast<std::size_t>(sender_offset + spec.n_flows) >
        topo.sender_hosts().size()) {
        throw std::invalid_argument("elephants need more sender hosts than "
                                    "the topology provides");
    }
    std::vector<ElephantPlan> plans;
    for (int i = 0; i < spec.n_flows; ++i) {
        ElephantPlan plan;
        plan.sender_host = topo.sender_hosts()[sender_offset + i];
        plan.receiver_host = topo.receiver_host();
        plan.start = time_from_sec(spec.start_s);
        plan.stop = time_from_sec(spec.start_s + spec.duration_s);
        plans.push_back(plan);
    }
    return plans;
}

} // namespace rwndq
