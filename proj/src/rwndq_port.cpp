#include "rwndq/rwndq_port.hpp"

#include <cassert>
#include <cmath>

namespace rwndq {

namespace {

// Round-to-nearest division, halves away from zero.
std::int64_t div_round(__int128 num, __int128 den) {
    assert(den != 0);
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 half = den / 2;
    __int128 q = num >= 0 ? (num + half) / den : (num - half) / den;
    return static_cast<std::int64_t>(q);
}

std::int64_t mul_ratio(std::int64_t value, std::int64_t num, std::int64_t den) {
    return div_round(static_cast<__int128>(value) * num, den);
}

} // namespace

RwndqPortState::RwndqPortState(const RwndqParams& params)
    : params_(params),
      target_bytes_(static_cast<std::int64_t>(
          std::llround(params.target_occupancy *
                       static_cast<double>(params.buffer_bytes)))) {
    assert(params_.valid());
    rwnd_fx_ = target_bytes_ << kFracBits;
}

void RwndqPortState::reset_window() {
    rwnd_fx_ = target_bytes_ << kFracBits;
    slow_start_ = true;
}

void RwndqPortState::apply_floor() {
    std::int64_t floor_fx = params_.min_window_bytes << kFracBits;
    if (rwnd_fx_ < floor_fx) {
        rwnd_fx_ = floor_fx;
    }
}

void RwndqPortState::on_flow_open() {
    if (beta_ <= 0) {
        reset_window();
    } else {
        rwnd_fx_ = mul_ratio(rwnd_fx_, beta_, beta_ + 1);
    }
    beta_ += 1;
    apply_floor();
}

bool RwndqPortState::on_flow_close() {
    if (beta_ == 0) {
        close_underflows += 1;
        return false;
    }
    beta_ -= 1;
    if (beta_ >= 1) {
        rwnd_fx_ = mul_ratio(rwnd_fx_, beta_ + 1, beta_);
    } else {
        reset_window();
    }
    apply_floor();
    return true;
}

void RwndqPortState::on_timer_tick(std::int64_t queue_bytes) {
    // kappa = 1 - Q / (alpha * B); gamma accumulates kappa * MSS / M.
    __int128 num = static_cast<__int128>(mss_ << kFracBits) *
                   (target_bytes_ - queue_bytes);
    __int128 den = static_cast<__int128>(target_bytes_) * params_.ticks_per_update;
    gamma_fx_ += div_round(num, den);
    big_gamma_ += 1;
    if (big_gamma_ < params_.ticks_per_update) {
        return;
    }
    if (slow_start_) {
        rwnd_fx_ += (2 * mss_) << kFracBits;
    } else if (beta_ > 0) {
        rwnd_fx_ += div_round(gamma_fx_, beta_);
    }
    if (queue_bytes >= target_bytes_) {
        slow_start_ = false;
    }
    gamma_fx_ = 0;
    big_gamma_ = 0;
    apply_floor();
}

StampResult RwndqPortState::stamp_ack(Packet& pkt) {
    assert(pkt.tcp.has(tcpflag::ack));
    acks_seen += 1;
    ScaleDecode decoded = decode_and_clear_scale(pkt);
    if (!decoded.valid) {
        invalid_scale_count += 1;
    }
    StampResult result;
    result.scale = decoded.scale;
    result.scale_valid = decoded.valid;
    std::int64_t rwnd = rwnd_bytes();
    if (rwnd >= effective_window(pkt.tcp.rwnd_field, decoded.scale)) {
        return result;
    }
    set_window_field(pkt, field_for_window(rwnd, decoded.scale));
    acks_rewritten += 1;
    result.outcome = StampOutcome::rewritten;
    return result;
}

void RwndqPortState::on_data_packet(const Packet& pkt, SimTime now) {
    if (pkt.tcp.payload_len == 0) {
        return;
    }
    std::int64_t payload = pkt.tcp.payload_len;
    if (payload > mss_) {
        mss_ = payload;
    }
    last_data_at_ = now;
}

bool RwndqPortState::on_idle_check(SimTime now) {
    if (beta_ > 0 && now - last_data_at_ >= params_.idle_timeout) {
        beta_ = 0;
        reset_window();
        idle_resets += 1;
        return true;
    }
    return false;
}

} // namespace rwndq
