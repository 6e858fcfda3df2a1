#include "rwndq/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rwndq {

namespace {

constexpr std::uint16_t kMicePort = 80;
constexpr std::uint16_t kElephantPort = 5001;

struct Conn {
    std::uint32_t id = 0;
    std::uint32_t sender_host = 0;
    std::uint32_t receiver_host = 0;
    FlowKey flow;
    bool elephant = false;
    std::optional<TcpSender> sender;
    std::optional<TcpReceiver> receiver;
    std::uint64_t rto_gen = 0;
    std::uint64_t persist_gen = 0;
    SimTime start_time = 0;
    SimTime fct_end = -1;
    bool sender_done = false;
    std::uint32_t chain = ~0u;    // owning mice chain, if any
    std::uint32_t app = ~0u;      // owning elephant app, if any
};

struct ChainState {
    ChainPlan plan;
    int blocks_done = 0;
};

struct ElephantState {
    ElephantPlan plan;
    std::uint32_t conn = ~0u;
};

struct Probe {
    SimTime at = 0;
    SimTime effective = 0; // clamped to the actual end of the run
    bool done = false;
    std::vector<std::uint64_t> delivered;  // per conn id
    std::vector<__int128> port_integral;   // per port id
};

} // namespace

struct Simulation::Impl {
    explicit Impl(const ScenarioConfig& cfg);

    ScenarioConfig cfg;
    RwndqParams rwndq_params;
    Topology topo;
    EventQueue queue;
    std::vector<Conn> conns;
    std::vector<ChainState> chains;
    std::vector<ElephantState> elephants;

    bool trace_enabled = false;
    std::string trace;

    // Conservation and safety counters.
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t marked = 0;
    std::uint64_t outstanding_arrivals = 0;
    std::uint64_t checksum_violations = 0;
    std::uint64_t stamp_violations = 0;
    std::uint64_t completions = 0;
    std::uint64_t pending_work = 0;
    SimTime end_time = 0;

    // Measurement windows.
    std::pair<SimTime, SimTime> goodput_window{0, 0};
    std::pair<SimTime, SimTime> queue_window{0, 0};
    std::vector<Probe> probes;
    std::size_t next_probe = 0;

    EndpointConfig endpoint_config() const;
    std::uint32_t new_conn(std::uint32_t sender_host,
                           std::uint32_t receiver_host, bool elephant,
                           std::uint64_t payload, std::uint16_t dst_port);
    void start_conn(std::uint32_t conn_id);

    void host_send(Host& host, Packet&& pkt);
    void wire_output(Conn& conn, SenderOutput&& out);
    void deliver(Host& host, const Packet& pkt);
    void admit(OutPort& port, OutPort* paired, Packet&& pkt);
    void start_tx(OutPort& port);
    void handle_dequeue_complete(OutPort& port);
    void handle_arrival(Event& ev);
    void handle_rto(Event& ev);
    void handle_app(Event& ev);
    void handle_tick(Switch& sw);
    void handle_idle(Switch& sw);

    void run_probe(Probe& probe, SimTime effective);
    void trace_event(const Event& ev);
    std::string entity_name(const Event& ev) const;

    RunResult finalize(int status, const std::string& error);
};

Simulation::Impl::Impl(const ScenarioConfig& config)
    : cfg(config),
      rwndq_params{
          .tick_period = time_from_sec(config.aqm.t_s),
          .ticks_per_update = config.aqm.m,
          .buffer_bytes = config.topology.buffer_bytes,
          .target_occupancy = config.aqm.alpha,
          .idle_timeout = time_from_sec(config.aqm.idle_timeout_s),
          .min_window_bytes = config.aqm.min_window_bytes,
      },
      topo(config.topology,
           config.aqm.type == AqmType::rwndq      ? AqmKind::rwndq
           : config.aqm.type == AqmType::ecn_dctcp ? AqmKind::ecn
                                                   : AqmKind::droptail,
           rwndq_params,
           EcnMarker(config.aqm.threshold_fraction, config.aqm.ecn_use_avg,
                     time_from_sec(config.aqm.avg_sample_period_s))) {}

EndpointConfig Simulation::Impl::endpoint_config() const {
    EndpointConfig ep;
    ep.mss = cfg.sender.mss_bytes;
    ep.init_cwnd_segments = cfg.sender.init_cwnd_segments;
    ep.rto_min = time_from_sec(cfg.sender.rto_min_s);
    ep.rto_initial = time_from_sec(cfg.sender.rto_initial_s);
    ep.rto_max = time_from_sec(cfg.sender.rto_max_s);
    ep.dctcp_g = cfg.sender.dctcp_g;
    ep.window_scale = cfg.window_scale;
    ep.rcv_buf = cfg.sender.rcv_buf_bytes;
    return ep;
}

std::uint32_t Simulation::Impl::new_conn(std::uint32_t sender_host,
                                         std::uint32_t receiver_host,
                                         bool elephant, std::uint64_t payload,
                                         std::uint16_t dst_port) {
    Host& src = topo.hosts()[sender_host];
    Host& dst = topo.hosts()[receiver_host];
    Conn conn;
    conn.id = static_cast<std::uint32_t>(conns.size());
    conn.sender_host = sender_host;
    conn.receiver_host = receiver_host;
    conn.elephant = elephant;
    conn.flow = FlowKey{src.addr, dst.addr, src.next_src_port, dst_port};
    src.next_src_port =
        src.next_src_port >= 60000 ? 10000 : static_cast<std::uint16_t>(src.next_src_port + 1);
    conn.sender.emplace(cfg.sender.kind, endpoint_config(), conn.flow, conn.id,
                        payload);
    conn.start_time = queue.now();
    conns.push_back(std::move(conn));
    return conns.back().id;
}

void Simulation::Impl::start_conn(std::uint32_t conn_id) {
    Conn& conn = conns[conn_id];
    SenderOutput out = conn.sender->start(queue.now());
    wire_output(conn, std::move(out));
}

void Simulation::Impl::host_send(Host& host, Packet&& pkt) {
    host.shim.process_outgoing(pkt);
    injected += 1;
    admit(topo.ports()[host.nic], nullptr, std::move(pkt));
}

void Simulation::Impl::wire_output(Conn& conn, SenderOutput&& out) {
    Host& host = topo.hosts()[conn.sender_host];
    for (Packet& pkt : out.to_send) {
        host_send(host, std::move(pkt));
    }
    if (out.timers.cancel_rto) {
        conn.rto_gen += 1;
    }
    if (out.timers.rto_at) {
        conn.rto_gen += 1;
        queue.schedule(*out.timers.rto_at, EventKind::rto_expiry, conn.id,
                       conn.rto_gen, 0);
    }
    if (out.timers.cancel_persist) {
        conn.persist_gen += 1;
    }
    if (out.timers.persist_at) {
        conn.persist_gen += 1;
        queue.schedule(*out.timers.persist_at, EventKind::rto_expiry, conn.id,
                       conn.persist_gen, 1);
    }
    if (out.completed && !conn.sender_done) {
        conn.sender_done = true;
        completions += 1;
        if (conn.chain != ~0u) {
            // A chain stays pending until its last block's transfer is
            // acknowledged; the next request opens immediately.
            ChainState& chain = chains[conn.chain];
            chain.blocks_done += 1;
            if (chain.blocks_done < chain.plan.blocks) {
                queue.schedule(queue.now(), EventKind::app_start, conn.chain,
                               0, 0);
            } else if (pending_work > 0) {
                pending_work -= 1;
            }
        } else if (pending_work > 0) {
            pending_work -= 1;
        }
    }
}

void Simulation::Impl::admit(OutPort& port, OutPort* paired, Packet&& pkt) {
    SimTime now = queue.now();
    if (port.aqm == AqmKind::rwndq) {
        RwndqPortState& self = *port.rwndq;
        RwndqPortState* data_side =
            (paired != nullptr && paired->rwndq) ? &*paired->rwndq : nullptr;
        self.on_data_packet(pkt, now);
        if (pkt.is_syn_ack()) {
            self.on_flow_open();
            if (data_side != nullptr) {
                data_side->on_flow_open();
            }
        }
        if (pkt.tcp.has(tcpflag::fin) || pkt.tcp.has(tcpflag::rst)) {
            self.on_flow_close();
            if (data_side != nullptr) {
                data_side->on_flow_close();
            }
        }
        if (pkt.tcp.has(tcpflag::ack)) {
            RwndqPortState& stamping =
                (cfg.aqm.stamp_mode == StampMode::data_port &&
                 data_side != nullptr)
                    ? *data_side
                    : self;
            StampResult res = stamping.stamp_ack(pkt);
            if (effective_window(pkt.tcp.rwnd_field, res.scale) >
                stamping.rwnd_bytes()) {
                stamp_violations += 1;
            }
        }
    } else if (port.aqm == AqmKind::ecn) {
        if (port.ecn->maybe_mark(pkt, port.q_bytes, port.capacity, now)) {
            port.marks += 1;
            marked += 1;
        }
    }

    if (port.capacity >= 0 &&
        droptail_admit(port.q_bytes, port.capacity, pkt.size_on_wire) ==
            AdmitDecision::drop) {
        port.drops += 1;
        dropped += 1;
        return;
    }
    port.note_q_change(now);
    port.q_bytes += pkt.size_on_wire;
    port.max_q = std::max(port.max_q, port.q_bytes);
    port.admitted += 1;
    port.fifo.push_back(std::move(pkt));
    if (!port.busy) {
        start_tx(port);
    }
}

void Simulation::Impl::start_tx(OutPort& port) {
    assert(!port.fifo.empty());
    port.busy = true;
    SimTime done = queue.now() + tx_time(port.fifo.front().size_on_wire,
                                         port.rate_bps);
    queue.schedule(done, EventKind::dequeue_complete, port.id);
}

void Simulation::Impl::handle_dequeue_complete(OutPort& port) {
    assert(port.busy && !port.fifo.empty());
    Packet pkt = std::move(port.fifo.front());
    port.fifo.pop_front();
    port.note_q_change(queue.now());
    port.q_bytes -= pkt.size_on_wire;
    outstanding_arrivals += 1;
    queue.schedule(queue.now() + port.propagation, EventKind::packet_arrival,
                   port.peer, port.owner, 0, std::move(pkt));
    if (!port.fifo.empty()) {
        start_tx(port);
    } else {
        port.busy = false;
    }
}

void Simulation::Impl::deliver(Host& host, const Packet& pkt) {
    delivered += 1;
    if (!tcp_checksum_valid(pkt) || !ip_checksum_valid(pkt)) {
        checksum_violations += 1;
    }
    if (pkt.conn_id >= conns.size()) {
        return;
    }
    Conn& conn = conns[pkt.conn_id];
    SimTime now = queue.now();
    if (host.index == conn.receiver_host &&
        pkt.flow.dst_addr == host.addr &&
        pkt.flow.src_addr == topo.hosts()[conn.sender_host].addr) {
        if (!conn.receiver) {
            conn.receiver.emplace(endpoint_config(), conn.flow, conn.id);
        }
        TcpReceiver::Output out = conn.receiver->on_segment(pkt, now);
        if (out.completed_now && conn.fct_end < 0) {
            conn.fct_end = now;
        }
        if (out.ack) {
            host_send(host, std::move(*out.ack));
        }
    } else if (host.index == conn.sender_host && conn.sender) {
        SenderOutput out = conn.sender->on_packet(pkt, now);
        wire_output(conn, std::move(out));
    }
}

void Simulation::Impl::handle_arrival(Event& ev) {
    assert(ev.pkt.has_value());
    outstanding_arrivals -= 1;
    NodeId node = ev.target;
    NodeId from = static_cast<NodeId>(ev.a);
    if (topo.is_host(node)) {
        deliver(topo.host_at(node), *ev.pkt);
        return;
    }
    Switch& sw = topo.switch_at(node);
    auto route = sw.route.find(ev.pkt->flow.dst_addr);
    if (route == sw.route.end()) {
        throw SimError("no route for destination at " + sw.name);
    }
    OutPort& out = topo.ports()[route->second];
    OutPort* paired = nullptr;
    auto toward = sw.port_toward.find(from);
    if (toward != sw.port_toward.end()) {
        paired = &topo.ports()[toward->second];
    }
    admit(out, paired, std::move(*ev.pkt));
}

void Simulation::Impl::handle_rto(Event& ev) {
    Conn& conn = conns[ev.target];
    if (!conn.sender) {
        return;
    }
    if (ev.b == 0) {
        if (ev.a != conn.rto_gen) {
            return; // superseded timer
        }
        SenderOutput out = conn.sender->on_rto(queue.now());
        wire_output(conn, std::move(out));
    } else {
        if (ev.a != conn.persist_gen) {
            return;
        }
        SenderOutput out = conn.sender->on_persist(queue.now());
        wire_output(conn, std::move(out));
    }
}

void Simulation::Impl::handle_app(Event& ev) {
    if (ev.a == 0) {
        // Mice chain: open the next block's connection.
        ChainState& chain = chains[ev.target];
        std::uint32_t id =
            new_conn(chain.plan.sender_host, chain.plan.receiver_host, false,
                     static_cast<std::uint64_t>(chain.plan.block_size),
                     kMicePort);
        conns[id].chain = ev.target;
        start_conn(id);
    } else if (ev.a == 1) {
        ElephantState& app = elephants[ev.target];
        std::uint32_t id = new_conn(app.plan.sender_host,
                                    app.plan.receiver_host, true,
                                    TcpSender::kUnbounded, kElephantPort);
        conns[id].app = ev.target;
        app.conn = id;
        start_conn(id);
    } else {
        ElephantState& app = elephants[ev.target];
        if (app.conn != ~0u) {
            Conn& conn = conns[app.conn];
            if (conn.sender && !conn.sender_done) {
                SenderOutput out = conn.sender->finish_app(queue.now());
                wire_output(conn, std::move(out));
            }
        }
    }
}

void Simulation::Impl::handle_tick(Switch& sw) {
    for (PortId pid : sw.ports) {
        OutPort& port = topo.ports()[pid];
        if (port.rwndq) {
            port.rwndq->on_timer_tick(port.q_bytes);
        }
    }
    queue.schedule(queue.now() + rwndq_params.tick_period,
                   EventKind::rwndq_tick, sw.node);
}

void Simulation::Impl::handle_idle(Switch& sw) {
    for (PortId pid : sw.ports) {
        OutPort& port = topo.ports()[pid];
        if (port.rwndq) {
            port.rwndq->on_idle_check(queue.now());
        }
    }
    queue.schedule(queue.now() + rwndq_params.idle_timeout,
                   EventKind::idle_check, sw.node);
}

void Simulation::Impl::run_probe(Probe& probe, SimTime effective) {
    probe.effective = effective;
    probe.delivered.resize(conns.size(), 0);
    for (std::size_t i = 0; i < conns.size(); ++i) {
        probe.delivered[i] =
            conns[i].receiver ? conns[i].receiver->delivered_payload() : 0;
    }
    probe.port_integral.resize(topo.ports().size(), 0);
    for (OutPort& port : topo.ports()) {
        port.note_q_change(effective);
        probe.port_integral[port.id] = port.occupancy_integral;
    }
    probe.done = true;
}

std::string Simulation::Impl::entity_name(const Event& ev) const {
    switch (ev.kind) {
    case EventKind::packet_arrival:
        return ev.target < topo.hosts().size()
                   ? topo.hosts()[ev.target].name
                   : topo.switches()[ev.target - topo.hosts().size()].name;
    case EventKind::dequeue_complete:
        return topo.ports()[ev.target].name;
    case EventKind::rwndq_tick:
    case EventKind::idle_check:
        return topo.switches()[ev.target - topo.hosts().size()].name;
    case EventKind::rto_expiry:
        return topo.hosts()[conns[ev.target].sender_host].name;
    case EventKind::app_start:
        return (ev.a == 0 ? "chain" : "elephant") + std::to_string(ev.target);
    case EventKind::sim_end:
        return "-";
    }
    return "-";
}

void Simulation::Impl::trace_event(const Event& ev) {
    trace += std::to_string(ev.time);
    trace += '\t';
    trace += std::to_string(ev.seq);
    trace += '\t';
    trace += event_kind_name(ev.kind);
    trace += '\t';
    trace += entity_name(ev);
    trace += '\t';
    if (ev.pkt) {
        trace += std::to_string(ev.pkt->conn_id);
    } else if (ev.kind == EventKind::rto_expiry) {
        trace += std::to_string(ev.target);
    } else {
        trace += '-';
    }
    trace += '\t';
    if (ev.pkt) {
        const Packet& p = *ev.pkt;
        trace += "seq=" + std::to_string(p.tcp.seq) +
                 " ack=" + std::to_string(p.tcp.ack_no) +
                 " len=" + std::to_string(p.tcp.payload_len) + " flags=";
        if (p.tcp.has(tcpflag::syn)) trace += 'S';
        if (p.tcp.has(tcpflag::ack)) trace += 'A';
        if (p.tcp.has(tcpflag::fin)) trace += 'F';
        if (p.tcp.has(tcpflag::rst)) trace += 'R';
        if (p.tcp.has(tcpflag::ece)) trace += 'E';
    } else if (ev.kind == EventKind::rto_expiry) {
        trace += ev.b == 0 ? "rto" : "persist";
    } else {
        trace += '-';
    }
    trace += '\n';
}

RunResult Simulation::Impl::finalize(int status, const std::string& error) {
    RunResult result;
    result.status = status;
    result.error = error;
    result.resolved_config = resolved_config_json(cfg);
    result.trace = trace;

    for (OutPort& port : topo.ports()) {
        port.note_q_change(end_time);
    }
    for (Probe& probe : probes) {
        if (!probe.done) {
            run_probe(probe, end_time);
        }
    }

    // Flow records.
    std::vector<FlowRecord> flows;
    std::vector<double> mice_fcts;
    std::uint64_t mice_total = 0;
    std::uint64_t mice_completed = 0;
    std::uint64_t elephant_total = 0;
    for (const Conn& conn : conns) {
        FlowRecord rec;
        rec.flow_id = conn.id;
        rec.src = topo.hosts()[conn.sender_host].name;
        rec.dst = topo.hosts()[conn.receiver_host].name;
        rec.elephant = conn.elephant;
        rec.start_s = time_to_sec(conn.start_time);
        if (conn.fct_end >= 0) {
            rec.fct_s = time_to_sec(conn.fct_end - conn.start_time);
        }
        rec.bytes = conn.receiver ? conn.receiver->delivered_payload() : 0;
        rec.retransmissions = conn.sender ? conn.sender->retransmissions() : 0;
        if (conn.elephant) {
            elephant_total += 1;
        } else {
            mice_total += 1;
            if (rec.fct_s) {
                mice_completed += 1;
                mice_fcts.push_back(*rec.fct_s);
            }
        }
        flows.push_back(std::move(rec));
    }
    result.flows_csv = flows_csv(flows);

    // Port records (whole-run means).
    std::vector<PortRecord> port_records;
    for (const OutPort& port : topo.ports()) {
        PortRecord rec;
        rec.port_id = port.name;
        rec.drops = port.drops;
        rec.marks = port.marks;
        rec.max_q_bytes = port.max_q;
        rec.mean_q_bytes =
            end_time > 0
                ? static_cast<double>(port.occupancy_integral) /
                      static_cast<double>(end_time)
                : 0.0;
        port_records.push_back(std::move(rec));
    }
    result.ports_csv = ports_csv(port_records);

    // Windowed queue occupancy; bottleneck = busiest switch port.
    const Probe& q0 = probes[2];
    const Probe& q1 = probes[3];
    double queue_span = time_to_sec(q1.effective - q0.effective);
    int bottleneck = -1;
    double bottleneck_mean = -1;
    for (const OutPort& port : topo.ports()) {
        if (!port.switch_owned) {
            continue;
        }
        double mean =
            queue_span > 0
                ? static_cast<double>(q1.port_integral[port.id] -
                                      q0.port_integral[port.id]) /
                      static_cast<double>(q1.effective - q0.effective)
                : 0.0;
        if (mean > bottleneck_mean) {
            bottleneck_mean = mean;
            bottleneck = static_cast<int>(port.id);
        }
    }

    // Elephant goodput over the goodput window.
    const Probe& g0 = probes[0];
    const Probe& g1 = probes[1];
    double goodput_span = time_to_sec(g1.effective - g0.effective);
    std::vector<double> elephant_goodputs;
    for (const Conn& conn : conns) {
        if (!conn.elephant) {
            continue;
        }
        std::uint64_t d0 =
            conn.id < g0.delivered.size() ? g0.delivered[conn.id] : 0;
        std::uint64_t d1 =
            conn.id < g1.delivered.size() ? g1.delivered[conn.id] : 0;
        double bps = goodput_span > 0
                         ? static_cast<double>(d1 - d0) * 8.0 / goodput_span
                         : 0.0;
        elephant_goodputs.push_back(bps);
    }

    std::vector<SummaryEntry> summary;
    auto add_num = [&](const std::string& key, double v) {
        summary.push_back({key, format_value(v), v});
        result.values[key] = v;
    };
    auto add_int = [&](const std::string& key, std::uint64_t v) {
        summary.push_back({key, std::to_string(v), static_cast<double>(v)});
        result.values[key] = static_cast<double>(v);
    };
    auto add_empty = [&](const std::string& key) {
        summary.push_back({key, "", std::nullopt});
    };
    auto add_text = [&](const std::string& key, const std::string& v) {
        summary.push_back({key, v, std::nullopt});
        result.text_values[key] = v;
    };

    add_num("sim_end_s", time_to_sec(end_time));
    add_int("seed", cfg.seed);
    add_int("mice_total", mice_total);
    add_int("mice_completed", mice_completed);
    if (!mice_fcts.empty()) {
        FctStats stats = fct_stats(mice_fcts);
        add_num("mice_fct_avg_s", stats.avg);
        add_num("mice_fct_std_s", stats.stddev);
        add_num("mice_fct_max_s", stats.max);
        add_num("mice_fct_p99_s", stats.p99);
    } else {
        add_empty("mice_fct_avg_s");
        add_empty("mice_fct_std_s");
        add_empty("mice_fct_max_s");
        add_empty("mice_fct_p99_s");
    }
    add_int("elephant_total", elephant_total);
    if (!elephant_goodputs.empty()) {
        double sum = 0;
        for (double g : elephant_goodputs) sum += g;
        add_num("elephant_goodput_mean_bps",
                sum / static_cast<double>(elephant_goodputs.size()));
        bool any = std::any_of(elephant_goodputs.begin(),
                               elephant_goodputs.end(),
                               [](double g) { return g > 0; });
        if (any) {
            add_num("elephant_goodput_jain", jain_index(elephant_goodputs));
        } else {
            add_empty("elephant_goodput_jain");
        }
    } else {
        add_empty("elephant_goodput_mean_bps");
        add_empty("elephant_goodput_jain");
    }
    add_num("goodput_window_start_s", time_to_sec(g0.effective));
    add_num("goodput_window_end_s", time_to_sec(g1.effective));
    add_int("total_drops", dropped);
    add_int("total_marks", marked);
    if (bottleneck >= 0) {
        add_text("bottleneck_port", topo.ports()[bottleneck].name);
        add_num("bottleneck_mean_q_bytes", bottleneck_mean);
        add_int("bottleneck_max_q_bytes",
                static_cast<std::uint64_t>(topo.ports()[bottleneck].max_q));
    } else {
        add_empty("bottleneck_port");
        add_empty("bottleneck_mean_q_bytes");
        add_empty("bottleneck_max_q_bytes");
    }
    add_num("queue_window_start_s", time_to_sec(q0.effective));
    add_num("queue_window_end_s", time_to_sec(q1.effective));

    std::uint64_t acks_seen = 0;
    std::uint64_t acks_rewritten = 0;
    std::uint64_t invalid_scale = 0;
    std::uint64_t idle_resets = 0;
    for (const OutPort& port : topo.ports()) {
        if (port.rwndq) {
            acks_seen += port.rwndq->acks_seen;
            acks_rewritten += port.rwndq->acks_rewritten;
            invalid_scale += port.rwndq->invalid_scale_count;
            idle_resets += port.rwndq->idle_resets;
        }
    }
    std::uint64_t shim_unknown = 0;
    for (const Host& host : topo.hosts()) {
        shim_unknown += host.shim.unknown_flow_stamps;
    }
    add_int("acks_seen", acks_seen);
    add_int("acks_rewritten", acks_rewritten);
    add_int("invalid_scale_acks", invalid_scale);
    add_int("rwndq_idle_resets", idle_resets);
    add_int("shim_unknown_flow_stamps", shim_unknown);

    std::uint64_t in_flight = outstanding_arrivals;
    for (const OutPort& port : topo.ports()) {
        in_flight += port.fifo.size();
    }
    add_int("packets_injected", injected);
    add_int("packets_delivered", delivered);
    add_int("packets_dropped", dropped);
    add_int("packets_in_flight", in_flight);
    add_int("checksum_violations", checksum_violations);
    add_int("stamp_violations", stamp_violations);

    if (injected != delivered + dropped + in_flight) {
        result.status = kStatusInvariant;
        result.error = "packet conservation violated";
    }
    if (checksum_violations > 0 || stamp_violations > 0) {
        result.status = kStatusInvariant;
        result.error = "in-engine safety assertion failed";
    }
    result.summary_csv = summary_csv(summary);
    return result;
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}

Simulation::~Simulation() = default;

void Simulation::enable_trace(bool on) { impl_->trace_enabled = on; }

Topology& Simulation::topology() { return impl_->topo; }

RunResult Simulation::run() {
    Impl& im = *impl_;
    const ScenarioConfig& cfg = im.cfg;
    SimTime duration = time_from_sec(cfg.duration_s);

    try {
        // Measurement windows (clamped to the configured duration).
        auto gw = cfg.metrics.goodput_window_s.value_or(
            std::make_pair(0.0, cfg.duration_s));
        auto qw = cfg.metrics.queue_window_s.value_or(
            std::make_pair(0.0, cfg.duration_s));
        im.probes.resize(4);
        im.probes[0].at = std::min(time_from_sec(gw.first), duration);
        im.probes[1].at = std::min(time_from_sec(gw.second), duration);
        im.probes[2].at = std::min(time_from_sec(qw.first), duration);
        im.probes[3].at = std::min(time_from_sec(qw.second), duration);
        // Probe flushing needs chronological order; keep an index map.
        // (Probes are few; a simple stable sort of indices suffices.)
        std::vector<std::size_t> order{0, 1, 2, 3};
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return im.probes[a].at < im.probes[b].at;
                         });

        // The end-of-run event goes in first so it wins same-time ties.
        im.queue.schedule(duration, EventKind::sim_end, 0);

        // Free-running per-switch AQM timers.
        if (cfg.aqm.type == AqmType::rwndq) {
            for (const Switch& sw : im.topo.switches()) {
                im.queue.schedule(im.rwndq_params.tick_period,
                                  EventKind::rwndq_tick, sw.node);
                im.queue.schedule(im.rwndq_params.idle_timeout,
                                  EventKind::idle_check, sw.node);
            }
        }

        // Workload.
        if (cfg.incast) {
            auto plans = gen_incast(*cfg.incast, im.topo, cfg.seed);
            for (const ChainPlan& plan : plans) {
                std::uint32_t idx = static_cast<std::uint32_t>(im.chains.size());
                im.chains.push_back({plan, 0});
                im.pending_work += 1;
                im.queue.schedule(plan.start, EventKind::app_start, idx, 0, 0);
            }
        }
        if (cfg.elephants) {
            int offset = cfg.incast ? cfg.incast->n_senders : 0;
            auto plans = gen_elephants(*cfg.elephants, im.topo, offset);
            for (const ElephantPlan& plan : plans) {
                std::uint32_t idx =
                    static_cast<std::uint32_t>(im.elephants.size());
                im.elephants.push_back({plan, ~0u});
                im.pending_work += 1;
                im.queue.schedule(plan.start, EventKind::app_start, idx, 1, 0);
                im.queue.schedule(std::min(plan.stop, duration),
                                  EventKind::app_start, idx, 2, 0);
            }
        }

        bool stopped = false;
        im.queue.run_until(duration, [&](Event& ev) {
            // Probes snapshot state as of their own timestamp; anything at
            // the same instant has not run yet.
            while (im.next_probe < order.size()) {
                Probe& probe = im.probes[order[im.next_probe]];
                if (probe.at > ev.time) {
                    break;
                }
                im.run_probe(probe, probe.at);
                im.next_probe += 1;
            }
            if (im.trace_enabled) {
                im.trace_event(ev);
            }
            switch (ev.kind) {
            case EventKind::packet_arrival:
                im.handle_arrival(ev);
                break;
            case EventKind::dequeue_complete:
                im.handle_dequeue_complete(im.topo.ports()[ev.target]);
                break;
            case EventKind::rwndq_tick:
                im.handle_tick(im.topo.switch_at(ev.target));
                break;
            case EventKind::idle_check:
                im.handle_idle(im.topo.switch_at(ev.target));
                break;
            case EventKind::rto_expiry:
                im.handle_rto(ev);
                break;
            case EventKind::app_start:
                im.handle_app(ev);
                break;
            case EventKind::sim_end:
                stopped = true;
                return false;
            }
            if (im.pending_work == 0 &&
                (!im.chains.empty() || !im.elephants.empty())) {
                // All application flows finished; nothing left to measure.
                return false;
            }
            return true;
        });
        (void)stopped;
        im.end_time = im.queue.now();

        int status = kStatusOk;
        std::string error;
        if (im.completions == 0) {
            status = kStatusDeadlock;
            error = "no flow completed; scenario deadlocked";
        }
        return im.finalize(status, error);
    } catch (const SimError& e) {
        im.end_time = im.queue.now();
        RunResult result = im.finalize(kStatusInvariant, e.what());
        result.status = kStatusInvariant;
        result.error = e.what();
        return result;
    }
}

RunResult run_scenario(const ScenarioConfig& cfg, bool trace) {
    Simulation sim(cfg);
    sim.enable_trace(trace);
    return sim.run();
}

} // namespace rwndq
