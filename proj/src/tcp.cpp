#include "rwndq/tcp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rwndq {

// ---------------------------------------------------------------- sender --

TcpSender::TcpSender(SenderKind kind, const EndpointConfig& cfg, FlowKey flow,
                     std::uint32_t conn_id, std::uint64_t payload_bytes)
    : kind_(kind),
      cfg_(cfg),
      flow_(flow),
      conn_id_(conn_id),
      payload_bytes_(payload_bytes),
      cwnd_(cfg.init_cwnd_segments * cfg.mss),
      ssthresh_(1 << 30),
      peer_rwnd_(cfg.rcv_buf),
      rto_(cfg.rto_initial) {}

SimTime TcpSender::current_rto() const {
    SimTime r = rto_;
    for (int i = 0; i < rto_backoff_ && r < cfg_.rto_max; ++i) {
        r *= 2;
    }
    return std::min(r, cfg_.rto_max);
}

Packet TcpSender::build_syn(SimTime now) {
    Packet pkt;
    pkt.flow = flow_;
    pkt.conn_id = conn_id_;
    pkt.created_at = now;
    pkt.tcp.flags = tcpflag::syn;
    pkt.tcp.seq = 0;
    pkt.tcp.ack_no = 0;
    pkt.tcp.payload_len = 0;
    pkt.tcp.rwnd_field = field_for_window(cfg_.rcv_buf, 0);
    pkt.wscale_opt = static_cast<std::uint8_t>(cfg_.window_scale);
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes);
    pkt.size_on_wire = static_cast<std::uint32_t>(kHeaderBytes);
    set_checksums(pkt);
    return pkt;
}

Packet TcpSender::build_pure_ack(SimTime now) {
    Packet pkt;
    pkt.flow = flow_;
    pkt.conn_id = conn_id_;
    pkt.created_at = now;
    pkt.tcp.flags = tcpflag::ack;
    pkt.tcp.seq = snd_nxt_;
    pkt.tcp.ack_no = 1;
    pkt.tcp.payload_len = 0;
    pkt.tcp.rwnd_field = field_for_window(cfg_.rcv_buf, cfg_.window_scale);
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes);
    pkt.size_on_wire = static_cast<std::uint32_t>(kHeaderBytes);
    set_checksums(pkt);
    return pkt;
}

Packet TcpSender::build_segment(std::uint64_t seq, SimTime now,
                                bool retransmit) {
    assert(seq >= 1);
    Packet pkt;
    pkt.flow = flow_;
    pkt.conn_id = conn_id_;
    pkt.created_at = now;
    pkt.tcp.flags = tcpflag::ack;
    pkt.tcp.seq = seq;
    pkt.tcp.ack_no = 1;
    pkt.tcp.rwnd_field = field_for_window(cfg_.rcv_buf, cfg_.window_scale);

    std::uint64_t offset = seq - 1;
    std::uint64_t len = 0;
    if (payload_bounded() && offset >= payload_bytes_) {
        // Pure FIN after all payload went out separately.
        pkt.tcp.flags |= tcpflag::fin;
    } else {
        len = std::min<std::uint64_t>(cfg_.mss, payload_bytes_ - offset);
        if (payload_bounded() && offset + len == payload_bytes_) {
            pkt.tcp.flags |= tcpflag::fin;
        }
    }
    pkt.tcp.payload_len = static_cast<std::uint32_t>(len);
    if (kind_ == SenderKind::dctcp && len > 0) {
        pkt.ip.ecn = EcnCodepoint::ect0;
    }
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes + len);
    pkt.size_on_wire = static_cast<std::uint32_t>(kHeaderBytes + len);
    set_checksums(pkt);

    if (retransmit) {
        retransmissions_ += 1;
        rtt_pending_ = false; // Karn: never time retransmitted data
        if (pkt.tcp.has(tcpflag::fin)) {
            fin_sent_ = true;
        }
    }
    return pkt;
}

SenderOutput TcpSender::start(SimTime now) {
    SenderOutput out;
    assert(!syn_sent_);
    syn_sent_ = true;
    out.to_send.push_back(build_syn(now));
    snd_nxt_ = 1; // SYN holds sequence 0
    rtt_pending_ = true;
    rtt_seq_ = 1;
    rtt_sent_at_ = now;
    finish_output(out, now, true);
    return out;
}

void TcpSender::take_rtt_sample(SimTime sample) {
    if (srtt_ == 0) {
        srtt_ = sample;
        rttvar_ = sample / 2;
    } else {
        SimTime err = sample > srtt_ ? sample - srtt_ : srtt_ - sample;
        rttvar_ = (3 * rttvar_ + err) / 4;
        srtt_ = (7 * srtt_ + sample) / 8;
    }
    rto_ = std::clamp(srtt_ + 4 * rttvar_, cfg_.rto_min, cfg_.rto_max);
}

void TcpSender::dctcp_per_ack(const Packet& pkt, std::uint64_t newly) {
    dctcp_acked_ += newly;
    if (pkt.tcp.has(tcpflag::ece)) {
        dctcp_marked_ += newly;
    }
    if (snd_una_ < dctcp_window_end_ || dctcp_acked_ == 0) {
        return;
    }
    // One observation window completed: fold the marked fraction into alpha
    // and back off once if anything was marked.
    double f = static_cast<double>(dctcp_marked_) /
               static_cast<double>(dctcp_acked_);
    dctcp_alpha_ = (1.0 - cfg_.dctcp_g) * dctcp_alpha_ + cfg_.dctcp_g * f;
    if (dctcp_marked_ > 0) {
        auto reduced = static_cast<std::int64_t>(
            std::llround(static_cast<double>(cwnd_) * (1.0 - dctcp_alpha_ / 2.0)));
        cwnd_ = std::max<std::int64_t>(reduced, cfg_.mss);
        ssthresh_ = cwnd_;
        phase_ = SenderPhase::congestion_avoidance;
    }
    dctcp_acked_ = 0;
    dctcp_marked_ = 0;
    dctcp_window_end_ = snd_nxt_;
}

void TcpSender::on_new_ack(const Packet& pkt, std::uint64_t newly, SimTime now,
                           SenderOutput& out) {
    (void)out;
    dup_acks_ = 0;
    rto_backoff_ = 0;
    if (rtt_pending_ && snd_una_ >= rtt_seq_) {
        take_rtt_sample(now - rtt_sent_at_);
        rtt_pending_ = false;
    }
    if (phase_ == SenderPhase::fast_recovery) {
        // Classic Reno: deflate on the first ACK for new data.
        cwnd_ = ssthresh_;
        phase_ = SenderPhase::congestion_avoidance;
    } else if (phase_ == SenderPhase::slow_start) {
        cwnd_ += cfg_.mss;
        if (cwnd_ >= ssthresh_) {
            phase_ = SenderPhase::congestion_avoidance;
        }
    } else {
        cwnd_ += std::max<std::int64_t>(1, cfg_.mss * cfg_.mss / cwnd_);
    }
    if (kind_ == SenderKind::dctcp) {
        dctcp_per_ack(pkt, newly);
    }
}

SenderOutput TcpSender::on_packet(const Packet& pkt, SimTime now) {
    SenderOutput out;
    if (!pkt.tcp.has(tcpflag::ack)) {
        return out;
    }
    // Every ACK refreshes the flow-control window, rewritten or not.
    peer_rwnd_ = effective_window(pkt.tcp.rwnd_field, peer_scale_);

    if (pkt.tcp.has(tcpflag::syn)) {
        // SYN-ACK: learn the peer's scale, then reinterpret its window.
        peer_scale_ = std::min<int>(pkt.wscale_opt, kMaxWindowScale);
        peer_rwnd_ = effective_window(pkt.tcp.rwnd_field, peer_scale_);
        bool advanced = false;
        if (snd_una_ == 0 && pkt.tcp.ack_no >= 1) {
            snd_una_ = 1;
            advanced = true;
            dup_acks_ = 0;
            rto_backoff_ = 0;
            if (rtt_pending_ && snd_una_ >= rtt_seq_) {
                take_rtt_sample(now - rtt_sent_at_);
                rtt_pending_ = false;
            }
            dctcp_window_end_ = 1;
            send_pending(out, now);
            if (out.to_send.empty()) {
                // Nothing to transmit yet; complete the handshake anyway.
                out.to_send.push_back(build_pure_ack(now));
            }
        }
        finish_output(out, now, advanced);
        return out;
    }

    bool ack_advanced = false;
    if (pkt.tcp.ack_no > snd_una_) {
        std::uint64_t newly = pkt.tcp.ack_no - snd_una_;
        snd_una_ = pkt.tcp.ack_no;
        ack_advanced = true;
        on_new_ack(pkt, newly, now, out);
        if (fin_sent_ && payload_bounded() && snd_una_ >= fin_seq() + 1) {
            completed_ = true;
        }
    } else if (pkt.tcp.payload_len == 0 && !pkt.tcp.has(tcpflag::fin) &&
               pkt.tcp.ack_no == snd_una_ && snd_una_ < snd_nxt_) {
        dup_acks_ += 1;
        if (phase_ == SenderPhase::fast_recovery) {
            cwnd_ += cfg_.mss;
        } else if (dup_acks_ == 3) {
            ssthresh_ = std::max<std::int64_t>(cwnd_ / 2, 2 * cfg_.mss);
            cwnd_ = ssthresh_ + 3 * cfg_.mss;
            phase_ = SenderPhase::fast_recovery;
            out.to_send.push_back(build_segment(snd_una_, now, true));
        }
    }
    send_pending(out, now);
    finish_output(out, now, ack_advanced);
    return out;
}

void TcpSender::send_pending(SenderOutput& out, SimTime now) {
    if (snd_una_ == 0 || completed_) {
        return; // handshake incomplete or already done
    }
    while (true) {
        std::uint64_t offset = snd_nxt_ - 1;
        if (payload_bounded() && offset > payload_bytes_) {
            break; // FIN already out
        }
        if (payload_bounded() && offset == payload_bytes_) {
            if (fin_sent_) {
                break;
            }
            out.to_send.push_back(build_segment(snd_nxt_, now, false));
            snd_nxt_ += 1;
            fin_sent_ = true;
            continue;
        }
        if (!payload_bounded() || offset < payload_bytes_) {
            std::uint64_t len =
                std::min<std::uint64_t>(cfg_.mss, payload_bytes_ - offset);
            std::int64_t in_flight = static_cast<std::int64_t>(snd_nxt_ - snd_una_);
            std::int64_t usable = effective_send_window() - in_flight;
            if (usable <= 0) {
                break;
            }
            if (static_cast<std::int64_t>(len) > usable) {
                if (in_flight > 0) {
                    break;
                }
                // Head of line with a sub-segment window: send what fits so a
                // narrowly stamped window cannot stall the flow.
                len = static_cast<std::uint64_t>(usable);
            }
            std::uint64_t end = offset + len;
            bool fin = payload_bounded() && end == payload_bytes_;
            Packet pkt = build_segment(snd_nxt_, now, false);
            // build_segment derives len from mss; rebuild for partial sends.
            if (pkt.tcp.payload_len != len) {
                pkt.tcp.payload_len = static_cast<std::uint32_t>(len);
                pkt.tcp.flags = tcpflag::ack;
                if (fin) {
                    pkt.tcp.flags |= tcpflag::fin;
                }
                pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes + len);
                pkt.size_on_wire = static_cast<std::uint32_t>(kHeaderBytes + len);
                set_checksums(pkt);
            }
            out.to_send.push_back(pkt);
            snd_nxt_ += len + (fin ? 1 : 0);
            if (fin) {
                fin_sent_ = true;
            }
            if (!rtt_pending_) {
                rtt_pending_ = true;
                rtt_seq_ = snd_nxt_;
                rtt_sent_at_ = now;
            }
            continue;
        }
        break;
    }
}

void TcpSender::finish_output(SenderOutput& out, SimTime now,
                              bool ack_advanced) {
    out.completed = completed_;
    if (snd_una_ == snd_nxt_ || completed_) {
        if (rto_armed_) {
            out.timers.cancel_rto = true;
            rto_armed_ = false;
        }
    } else if (!rto_armed_ || ack_advanced || !out.to_send.empty()) {
        out.timers.rto_at = now + current_rto();
        rto_armed_ = true;
    }

    bool more_payload = snd_una_ > 0 && !completed_ &&
                        (!payload_bounded() || snd_nxt_ - 1 < payload_bytes_);
    bool blocked = more_payload && snd_una_ == snd_nxt_ &&
                   effective_send_window() <= 0;
    if (blocked && !persist_armed_) {
        out.timers.persist_at = now + current_rto();
        persist_armed_ = true;
    } else if (!blocked && persist_armed_) {
        out.timers.cancel_persist = true;
        persist_armed_ = false;
    }
}

SenderOutput TcpSender::on_rto(SimTime now) {
    SenderOutput out;
    if (snd_una_ == snd_nxt_ || completed_) {
        rto_armed_ = false;
        return out;
    }
    ssthresh_ = std::max<std::int64_t>(cwnd_ / 2, 2 * cfg_.mss);
    cwnd_ = cfg_.mss;
    phase_ = SenderPhase::slow_start;
    dup_acks_ = 0;
    rto_backoff_ += 1;
    if (snd_una_ == 0) {
        out.to_send.push_back(build_syn(now));
        retransmissions_ += 1;
        rtt_pending_ = false;
    } else {
        out.to_send.push_back(build_segment(snd_una_, now, true));
    }
    out.timers.rto_at = now + current_rto();
    rto_armed_ = true;
    out.completed = completed_;
    return out;
}

SenderOutput TcpSender::on_persist(SimTime now) {
    SenderOutput out;
    persist_armed_ = false;
    if (completed_ || snd_una_ == 0 || snd_una_ != snd_nxt_) {
        return out;
    }
    std::uint64_t offset = snd_nxt_ - 1;
    if (payload_bounded() && offset > payload_bytes_) {
        return out;
    }
    // Window probe: one segment past the closed window re-elicits an ACK
    // carrying the receiver's (or the switch's) current window.
    Packet pkt = build_segment(snd_nxt_, now, false);
    snd_nxt_ += pkt.tcp.payload_len + (pkt.tcp.has(tcpflag::fin) ? 1 : 0);
    if (pkt.tcp.has(tcpflag::fin)) {
        fin_sent_ = true;
    }
    out.to_send.push_back(pkt);
    out.timers.rto_at = now + current_rto();
    rto_armed_ = true;
    return out;
}

SenderOutput TcpSender::finish_app(SimTime now) {
    SenderOutput out;
    if (payload_bounded()) {
        return out;
    }
    payload_bytes_ = snd_nxt_ > 0 ? snd_nxt_ - 1 : 0;
    send_pending(out, now); // emits the trailing FIN
    finish_output(out, now, false);
    return out;
}

// -------------------------------------------------------------- receiver --

TcpReceiver::TcpReceiver(const EndpointConfig& cfg, FlowKey data_flow,
                         std::uint32_t conn_id)
    : cfg_(cfg), data_flow_(data_flow), conn_id_(conn_id) {}

std::int64_t TcpReceiver::free_buffer() const {
    std::int64_t buffered = 0;
    for (const auto& [start, end] : ooo_) {
        buffered += static_cast<std::int64_t>(end - start);
    }
    return std::max<std::int64_t>(0, cfg_.rcv_buf - buffered);
}

Packet TcpReceiver::build_ack(bool syn_ack, bool echo_ce, SimTime now) {
    Packet pkt;
    pkt.flow = data_flow_.reversed();
    pkt.conn_id = conn_id_;
    pkt.created_at = now;
    pkt.tcp.flags = tcpflag::ack;
    pkt.tcp.seq = syn_ack ? 0 : 1;
    pkt.tcp.ack_no = rcv_nxt_;
    pkt.tcp.payload_len = 0;
    if (syn_ack) {
        pkt.tcp.flags |= tcpflag::syn;
        pkt.wscale_opt = static_cast<std::uint8_t>(cfg_.window_scale);
    }
    if (echo_ce) {
        pkt.tcp.flags |= tcpflag::ece;
    }
    pkt.tcp.rwnd_field =
        field_for_window(free_buffer(), cfg_.window_scale);
    pkt.ip.total_len = static_cast<std::uint16_t>(kHeaderBytes);
    pkt.size_on_wire = static_cast<std::uint32_t>(kHeaderBytes);
    set_checksums(pkt);
    return pkt;
}

TcpReceiver::Output TcpReceiver::on_segment(const Packet& pkt, SimTime now) {
    Output out;
    bool is_syn = pkt.tcp.has(tcpflag::syn);
    bool has_payload = pkt.tcp.payload_len > 0;
    bool is_fin = pkt.tcp.has(tcpflag::fin);
    if (!is_syn && !has_payload && !is_fin) {
        return out; // pure ACK from the sender, nothing to answer
    }

    std::uint64_t start = pkt.tcp.seq;
    std::uint64_t end = start + pkt.tcp.payload_len;
    if (is_syn) {
        end += 1;
    }
    if (is_fin) {
        fin_seq_ = end;
        end += 1;
    }
    if (end > start) {
        auto it = ooo_.emplace(start, end).first;
        if (it->second < end) {
            it->second = end;
        }
        // Merge with neighbours.
        if (it != ooo_.begin()) {
            auto prev = std::prev(it);
            if (prev->second >= it->first) {
                prev->second = std::max(prev->second, it->second);
                ooo_.erase(it);
                it = prev;
            }
        }
        auto next = std::next(it);
        while (next != ooo_.end() && next->first <= it->second) {
            it->second = std::max(it->second, next->second);
            next = ooo_.erase(next);
        }
        if (it->first <= rcv_nxt_) {
            rcv_nxt_ = std::max(rcv_nxt_, it->second);
            ooo_.erase(it);
        }
    }

    // Contiguous payload delivered to the app (SYN holds sequence 0; payload
    // occupies [1, 1+P); the FIN unit never counts as payload).
    std::uint64_t payload_end = rcv_nxt_;
    if (fin_seq_ && payload_end > *fin_seq_) {
        payload_end = *fin_seq_;
    }
    delivered_payload_ = payload_end > 0 ? payload_end - 1 : 0;
    if (!complete_ && fin_seq_ && rcv_nxt_ >= *fin_seq_ + 1) {
        complete_ = true;
        out.completed_now = true;
    }

    bool echo_ce = pkt.ip.ecn == EcnCodepoint::ce;
    out.ack = build_ack(is_syn, echo_ce, now);
    return out;
}

// ------------------------------------------------------------------ shim --

void ShimTable::process_outgoing(Packet& pkt) {
    if (pkt.tcp.has(tcpflag::syn)) {
        scales_[pkt.flow] = std::min<int>(pkt.wscale_opt, kMaxWindowScale);
    }
    if (pkt.tcp.has(tcpflag::ack)) {
        auto it = scales_.find(pkt.flow);
        int scale = 0;
        if (it != scales_.end()) {
            scale = it->second;
        } else {
            unknown_flow_stamps += 1;
        }
        encode_scale(pkt, scale);
    }
    if (pkt.tcp.has(tcpflag::fin) || pkt.tcp.has(tcpflag::rst)) {
        scales_.erase(pkt.flow);
    }
}

} // namespace rwndq
