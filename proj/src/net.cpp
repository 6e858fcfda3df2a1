#include "rwndq/net.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "rwndq/event.hpp"

namespace rwndq {

namespace {

std::uint32_t make_addr(int rack, int host) {
    // 10.rack.host/16-style synthetic addressing.
    return (10u << 24) | (static_cast<std::uint32_t>(rack) << 16) |
           static_cast<std::uint32_t>(host + 1);
}

} // namespace

Topology::Topology(const TopologySpec& spec, AqmKind aqm_kind,
                   const RwndqParams& rwndq_params,
                   const EcnMarker& ecn_template)
    : spec_(spec) {
    if (spec.racks < 1 || spec.hosts_per_rack < 1) {
        throw std::invalid_argument("topology needs at least one rack and host");
    }

    int racks = spec.racks;
    int per_rack = spec.hosts_per_rack;
    for (int r = 0; r < racks; ++r) {
        for (int h = 0; h < per_rack; ++h) {
            Host host;
            host.index = static_cast<std::uint32_t>(hosts_.size());
            host.node = host.index;
            host.addr = make_addr(r, h);
            host.name = "r" + std::to_string(r) + "h" + std::to_string(h);
            hosts_.push_back(host);
            addr_to_host_[host.addr] = host.index;
        }
    }

    auto add_switch = [&](const std::string& name) {
        Switch sw;
        sw.index = static_cast<std::uint32_t>(switches_.size());
        sw.node = static_cast<NodeId>(hosts_.size() + sw.index);
        sw.name = name;
        switches_.push_back(sw);
        return sw.node;
    };

    if (racks == 1) {
        NodeId sw = add_switch("sw0");
        for (auto& host : hosts_) {
            connect(host.node, sw, aqm_kind, rwndq_params, ecn_template);
        }
        for (auto& host : hosts_) {
            switch_at(sw).route[host.addr] = switch_at(sw).port_toward[host.node];
        }
        // Last host receives; the rest send.
        receiver_host_ = static_cast<std::uint32_t>(hosts_.size() - 1);
        for (std::uint32_t i = 0; i + 1 < hosts_.size(); ++i) {
            sender_hosts_.push_back(i);
        }
    } else {
        std::vector<NodeId> tors;
        for (int r = 0; r < racks; ++r) {
            tors.push_back(add_switch("tor" + std::to_string(r)));
        }
        NodeId core = add_switch("core");
        for (int r = 0; r < racks; ++r) {
            for (int h = 0; h < per_rack; ++h) {
                NodeId host = static_cast<NodeId>(r * per_rack + h);
                connect(host, tors[r], aqm_kind, rwndq_params, ecn_template);
            }
            connect(tors[r], core, aqm_kind, rwndq_params, ecn_template);
        }
        // Routes: ToR sends local addresses to the host port, the rest up.
        for (int r = 0; r < racks; ++r) {
            Switch& tor = switch_at(tors[r]);
            for (int h = 0; h < per_rack; ++h) {
                const Host& host = hosts_[r * per_rack + h];
                tor.route[host.addr] = tor.port_toward[host.node];
            }
            for (const Host& host : hosts_) {
                if (!tor.route.count(host.addr)) {
                    tor.route[host.addr] = tor.port_toward[core];
                }
            }
            Switch& core_sw = switch_at(core);
            for (int h = 0; h < per_rack; ++h) {
                const Host& host = hosts_[r * per_rack + h];
                core_sw.route[host.addr] = core_sw.port_toward[tors[r]];
            }
        }
        // Senders come from all racks but the last; its first host receives.
        receiver_host_ = static_cast<std::uint32_t>((racks - 1) * per_rack);
        for (int r = 0; r < racks - 1; ++r) {
            for (int h = 0; h < per_rack; ++h) {
                sender_hosts_.push_back(static_cast<std::uint32_t>(r * per_rack + h));
            }
        }
    }
}

std::string Topology::node_name(NodeId node) const {
    if (node < hosts_.size()) {
        return hosts_[node].name;
    }
    return switches_[node - hosts_.size()].name;
}

PortId Topology::add_port(NodeId owner, NodeId peer, bool switch_owned,
                          AqmKind aqm_kind, const RwndqParams& rwndq_params,
                          const EcnMarker& ecn_template,
                          const std::string& name) {
    OutPort port;
    port.id = static_cast<PortId>(ports_.size());
    port.name = name;
    port.owner = owner;
    port.peer = peer;
    port.switch_owned = switch_owned;
    port.rate_bps = spec_.link_rate_bps;
    port.propagation = spec_.propagation;
    if (switch_owned) {
        port.aqm = aqm_kind;
        port.capacity = spec_.buffer_bytes;
        if (aqm_kind == AqmKind::rwndq) {
            port.rwndq.emplace(rwndq_params);
        } else if (aqm_kind == AqmKind::ecn) {
            port.ecn = ecn_template;
        }
    }
    ports_.push_back(std::move(port));
    return ports_.back().id;
}

void Topology::connect(NodeId a, NodeId b, AqmKind aqm_kind,
                       const RwndqParams& rwndq_params,
                       const EcnMarker& ecn_template) {
    bool a_is_switch = !is_host(a);
    bool b_is_switch = !is_host(b);
    PortId ab = add_port(a, b, a_is_switch, aqm_kind, rwndq_params,
                         ecn_template, node_name(a) + "->" + node_name(b));
    PortId ba = add_port(b, a, b_is_switch, aqm_kind, rwndq_params,
                         ecn_template, node_name(b) + "->" + node_name(a));
    if (a_is_switch) {
        switch_at(a).ports.push_back(ab);
        switch_at(a).port_toward[b] = ab;
    } else {
        host_at(a).nic = ab;
    }
    if (b_is_switch) {
        switch_at(b).ports.push_back(ba);
        switch_at(b).port_toward[a] = ba;
    } else {
        host_at(b).nic = ba;
    }
}

const Host* Topology::host_by_addr(std::uint32_t addr) const {
    auto it = addr_to_host_.find(addr);
    if (it == addr_to_host_.end()) {
        return nullptr;
    }
    return &hosts_[it->second];
}

std::vector<NodeId> Topology::path(std::uint32_t src_host,
                                   std::uint32_t dst_host) const {
    std::vector<NodeId> nodes;
    NodeId current = hosts_.at(src_host).node;
    std::uint32_t dst_addr = hosts_.at(dst_host).addr;
    nodes.push_back(current);
    const OutPort* port = &ports_[hosts_.at(src_host).nic];
    while (true) {
        NodeId next = port->peer;
        nodes.push_back(next);
        if (is_host(next)) {
            break;
        }
        const Switch& sw = const_cast<Topology*>(this)->switch_at(next);
        auto it = sw.route.find(dst_addr);
        if (it == sw.route.end()) {
            throw SimError("no route to destination");
        }
        port = &ports_[it->second];
    }
    return nodes;
}

} // namespace rwndq
