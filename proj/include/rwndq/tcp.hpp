#ifndef RWNDQ_TCP_HPP
#define RWNDQ_TCP_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rwndq/packet.hpp"
#include "rwndq/sim_time.hpp"

namespace rwndq {

enum class SenderKind {
    reno,
    dctcp,
};

enum class SenderPhase {
    slow_start,
    congestion_avoidance,
    fast_recovery,
};

struct EndpointConfig {
    std::int64_t mss = kDefaultMss;
    int init_cwnd_segments = 10;
    SimTime rto_min = time_from_ms(200);
    SimTime rto_initial = time_from_sec(1.0);
    SimTime rto_max = time_from_sec(60.0);
    double dctcp_g = 1.0 / 16.0;
    int window_scale = 2;              // this endpoint's advertised scale
    std::int64_t rcv_buf = 256 * 1024; // advertised receive buffer
};

// Timer requests handed back to the owning event loop. The loop keeps
// generation counters so stale expirations are ignored.
struct TimerCommands {
    std::optional<SimTime> rto_at;
    bool cancel_rto = false;
    std::optional<SimTime> persist_at;
    bool cancel_persist = false;
};

struct SenderOutput {
    std::vector<Packet> to_send;
    TimerCommands timers;
    bool completed = false; // SYN, all payload, and FIN acknowledged
};

// One-directional TCP sender, segment-based with cumulative ACKs.
// Sequence space: SYN occupies 0, payload byte i maps to 1+i, FIN follows the
// last payload byte (piggybacked on the final data segment when possible).
//
// The window in force is always min(cwnd, peer_rwnd) where peer_rwnd is the
// scaled window field of the most recent ACK, so in-network rewrites take
// effect immediately. A zero usable window with nothing in flight arms a
// persist-style probe to avoid deadlock.
class TcpSender {
  public:
    static constexpr std::uint64_t kUnbounded = ~std::uint64_t{0} >> 2;

    TcpSender(SenderKind kind, const EndpointConfig& cfg, FlowKey flow,
              std::uint32_t conn_id, std::uint64_t payload_bytes);

    SenderOutput start(SimTime now);
    SenderOutput on_packet(const Packet& pkt, SimTime now);
    SenderOutput on_rto(SimTime now);
    SenderOutput on_persist(SimTime now);
    // Stops an open-ended sender: the payload size is pinned at what has
    // been sent so far and a FIN goes out.
    SenderOutput finish_app(SimTime now);

    std::int64_t effective_send_window() const {
        return cwnd_ < peer_rwnd_ ? cwnd_ : peer_rwnd_;
    }

    std::int64_t cwnd() const { return cwnd_; }
    std::int64_t ssthresh() const { return ssthresh_; }
    SenderPhase phase() const { return phase_; }
    int dup_acks() const { return dup_acks_; }
    std::int64_t peer_rwnd() const { return peer_rwnd_; }
    SimTime rto() const { return rto_; }
    SimTime srtt() const { return srtt_; }
    double dctcp_alpha() const { return dctcp_alpha_; }
    std::uint64_t snd_una() const { return snd_una_; }
    std::uint64_t snd_nxt() const { return snd_nxt_; }
    std::uint64_t payload_bytes() const { return payload_bytes_; }
    std::uint64_t retransmissions() const { return retransmissions_; }
    std::uint64_t in_flight() const { return snd_nxt_ - snd_una_; }
    bool completed() const { return completed_; }
    const FlowKey& flow() const { return flow_; }
    int peer_scale() const { return peer_scale_; }

  private:
    Packet build_segment(std::uint64_t seq, SimTime now, bool retransmit);
    Packet build_syn(SimTime now);
    Packet build_pure_ack(SimTime now);
    void send_pending(SenderOutput& out, SimTime now);
    void finish_output(SenderOutput& out, SimTime now, bool ack_advanced);
    void on_new_ack(const Packet& pkt, std::uint64_t newly, SimTime now,
                    SenderOutput& out);
    void dctcp_per_ack(const Packet& pkt, std::uint64_t newly);
    void take_rtt_sample(SimTime sample);
    SimTime current_rto() const;
    std::uint64_t fin_seq() const { return 1 + payload_bytes_; }
    bool payload_bounded() const { return payload_bytes_ != kUnbounded; }

    SenderKind kind_;
    EndpointConfig cfg_;
    FlowKey flow_;
    std::uint32_t conn_id_;
    std::uint64_t payload_bytes_;

    std::int64_t cwnd_;
    std::int64_t ssthresh_;
    SenderPhase phase_ = SenderPhase::slow_start;
    int dup_acks_ = 0;

    std::uint64_t snd_una_ = 0;
    std::uint64_t snd_nxt_ = 0;
    bool syn_sent_ = false;
    bool fin_sent_ = false;
    bool completed_ = false;

    std::int64_t peer_rwnd_;
    int peer_scale_ = 0;

    SimTime srtt_ = 0;
    SimTime rttvar_ = 0;
    SimTime rto_;
    int rto_backoff_ = 0;
    bool rto_armed_ = false;
    bool persist_armed_ = false;

    bool rtt_pending_ = false;
    std::uint64_t rtt_seq_ = 0;
    SimTime rtt_sent_at_ = 0;

    // DCTCP per-window accounting.
    double dctcp_alpha_ = 0.0;
    std::uint64_t dctcp_acked_ = 0;
    std::uint64_t dctcp_marked_ = 0;
    std::uint64_t dctcp_window_end_ = 0;

    std::uint64_t retransmissions_ = 0;
};

// Receive side: reassembles segments, delivers contiguous payload to an
// immediately-consuming application, and answers every data segment with a
// cumulative ACK carrying the current free-buffer window. CE marks are
// echoed on the matching ACK.
class TcpReceiver {
  public:
    TcpReceiver(const EndpointConfig& cfg, FlowKey data_flow,
                std::uint32_t conn_id);

    struct Output {
        std::optional<Packet> ack;
        bool completed_now = false;
    };

    Output on_segment(const Packet& pkt, SimTime now);

    std::uint64_t delivered_payload() const { return delivered_payload_; }
    bool complete() const { return complete_; }
    std::uint64_t rcv_nxt() const { return rcv_nxt_; }

  private:
    Packet build_ack(bool syn_ack, bool echo_ce, SimTime now);
    std::int64_t free_buffer() const;

    EndpointConfig cfg_;
    FlowKey data_flow_;
    std::uint32_t conn_id_;

    std::map<std::uint64_t, std::uint64_t> ooo_; // start -> end, disjoint
    std::uint64_t rcv_nxt_ = 0;
    std::optional<std::uint64_t> fin_seq_;
    std::uint64_t delivered_payload_ = 0;
    bool complete_ = false;
};

// End-host shim: learns each outgoing flow's window-scale factor from its
// SYN / SYN-ACK and stamps it into the reserved bits of every outgoing ACK.
// Entries are dropped once a FIN (or RST) leaves the host.
class ShimTable {
  public:
    void process_outgoing(Packet& pkt);

    std::size_t size() const { return scales_.size(); }
    bool contains(const FlowKey& key) const { return scales_.count(key) != 0; }
    std::uint64_t unknown_flow_stamps = 0;

  private:
    std::map<FlowKey, int> scales_;
};

} // namespace rwndq

#endif
