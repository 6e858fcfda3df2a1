#ifndef RWNDQ_NET_HPP
#define RWNDQ_NET_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwndq/aqm.hpp"
#include "rwndq/packet.hpp"
#include "rwndq/rwndq_port.hpp"
#include "rwndq/sim_time.hpp"
#include "rwndq/tcp.hpp"

namespace rwndq {

using NodeId = std::uint32_t;
using PortId = std::uint32_t;
constexpr NodeId kNoNode = ~NodeId{0};
constexpr PortId kNoPort = ~PortId{0};

enum class AqmKind : std::uint8_t {
    none,     // host NIC: plain unbounded FIFO
    droptail,
    rwndq,
    ecn,
};

enum class StampMode : std::uint8_t {
    data_port,      // stamp with the reverse-direction (data) queue's window
    departure_port, // stamp with the ACK's own output queue
};

// One direction of a link plus the output queue feeding it. Queue occupancy
// counts a packet from admission until its serialization completes.
struct OutPort {
    PortId id = kNoPort;
    std::string name;
    NodeId owner = kNoNode;
    NodeId peer = kNoNode;
    bool switch_owned = false;
    std::int64_t rate_bps = 0;
    SimTime propagation = 0;

    AqmKind aqm = AqmKind::none;
    std::int64_t capacity = -1; // <0: unbounded
    std::optional<RwndqPortState> rwndq;
    std::optional<EcnMarker> ecn;

    std::deque<Packet> fifo;
    std::int64_t q_bytes = 0;
    bool busy = false;

    std::uint64_t drops = 0;
    std::uint64_t marks = 0;
    std::uint64_t admitted = 0;

    // Time-weighted occupancy bookkeeping.
    SimTime occupancy_mark = 0;
    __int128 occupancy_integral = 0; // byte-picoseconds
    std::int64_t max_q = 0;

    void note_q_change(SimTime now) {
        occupancy_integral +=
            static_cast<__int128>(q_bytes) * (now - occupancy_mark);
        occupancy_mark = now;
    }
};

struct Host {
    NodeId node = kNoNode;
    std::uint32_t index = 0;
    std::uint32_t addr = 0;
    std::string name;
    PortId nic = kNoPort;
    ShimTable shim;
    std::uint16_t next_src_port = 10000;
};

struct Switch {
    NodeId node = kNoNode;
    std::uint32_t index = 0;
    std::string name;
    std::vector<PortId> ports;            // owned, in creation order
    std::map<NodeId, PortId> port_toward; // neighbour node -> output port
    std::map<std::uint32_t, PortId> route; // destination address -> port
};

struct TopologySpec {
    int racks = 2;           // >= 2: last rack receives; 1: star topology
    int hosts_per_rack = 16;
    std::int64_t link_rate_bps = 1'000'000'000;
    SimTime propagation = time_from_us(25);
    std::int64_t buffer_bytes = 128 * 1024;
};

// Hosts and switches with symmetric static routes. For racks >= 2 the shape
// is leaf/core: rack ToRs on a core switch, last rack is the receiver side.
// racks == 1 collapses to a single switch with every host attached.
class Topology {
  public:
    Topology(const TopologySpec& spec, AqmKind aqm_kind,
             const RwndqParams& rwndq_params, const EcnMarker& ecn_template);

    const TopologySpec& spec() const { return spec_; }
    std::vector<Host>& hosts() { return hosts_; }
    const std::vector<Host>& hosts() const { return hosts_; }
    std::vector<Switch>& switches() { return switches_; }
    const std::vector<Switch>& switches() const { return switches_; }
    std::vector<OutPort>& ports() { return ports_; }
    const std::vector<OutPort>& ports() const { return ports_; }

    bool is_host(NodeId node) const { return node < hosts_.size(); }
    Host& host_at(NodeId node) { return hosts_.at(node); }
    Switch& switch_at(NodeId node) {
        return switches_.at(node - hosts_.size());
    }
    NodeId switch_node(std::uint32_t index) const {
        return static_cast<NodeId>(hosts_.size() + index);
    }

    // Hosts available as traffic sources, in assignment order, and the
    // single destination host used by the generators.
    const std::vector<std::uint32_t>& sender_hosts() const {
        return sender_hosts_;
    }
    std::uint32_t receiver_host() const { return receiver_host_; }

    const Host* host_by_addr(std::uint32_t addr) const;

    // Node sequence of the forward path (used by the symmetry check).
    std::vector<NodeId> path(std::uint32_t src_host,
                             std::uint32_t dst_host) const;

  private:
    PortId add_port(NodeId owner, NodeId peer, bool switch_owned,
                    AqmKind aqm_kind, const RwndqParams& rwndq_params,
                    const EcnMarker& ecn_template, const std::string& name);
    void connect(NodeId a, NodeId b, AqmKind aqm_kind,
                 const RwndqParams& rwndq_params,
                 const EcnMarker& ecn_template);
    std::string node_name(NodeId node) const;

    TopologySpec spec_;
    std::vector<Host> hosts_;
    std::vector<Switch> switches_;
    std::vector<OutPort> ports_;
    std::vector<std::uint32_t> sender_hosts_;
    std::uint32_t receiver_host_ = 0;
    std::map<std::uint32_t, std::uint32_t> addr_to_host_;
};

} // namespace rwndq

#endif
