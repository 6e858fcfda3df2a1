#ifndef RWNDQ_RWNDQ_PORT_HPP
#define RWNDQ_RWNDQ_PORT_HPP

#include <cstdint>

#include "rwndq/packet.hpp"
#include "rwndq/sim_time.hpp"

namespace rwndq {

struct RwndqParams {
    SimTime tick_period = time_from_us(100);      // T
    int ticks_per_update = 10;                    // M
    std::int64_t buffer_bytes = 128 * 1024;       // B
    double target_occupancy = 0.25;               // alpha, in (0,1)
    SimTime idle_timeout = time_from_sec(1.0);
    std::int64_t min_window_bytes = kDefaultMss;  // floor, avoids dead windows

    bool valid() const {
        return tick_period > 0 && ticks_per_update >= 1 && buffer_bytes > 0 &&
               target_occupancy > 0.0 && target_occupancy < 1.0 &&
               idle_timeout > 0 && min_window_bytes >= 0;
    }
};

enum class StampOutcome {
    unchanged,
    rewritten,
};

struct StampResult {
    StampOutcome outcome = StampOutcome::unchanged;
    int scale = 0;           // scale the window field was interpreted with
    bool scale_valid = true; // false when the carrier bits were corrupt
};

// Per-output-port state of the receive-window AQM: a shared per-queue window
// split equally among the flows counted on this queue, adapted toward the
// target occupancy on a free-running timer, and stamped into passing ACKs.
//
// The window and its accumulated increment are kept in 2^-16-byte fixed
// point so repeated beta/(beta+1) rescaling does not drift: an open/close
// pair restores the window to within a byte.
class RwndqPortState {
  public:
    explicit RwndqPortState(const RwndqParams& params);

    // A SYN-ACK traversing the queue: first flow resets the window to the
    // target queue level and enters slow start, later flows split it.
    void on_flow_open();

    // A FIN or RST for an active flow. Returns false on underflow (duplicate
    // close); the count stays at zero in that case.
    bool on_flow_close();

    // Free-running timer, fires every tick_period with the queue length.
    void on_timer_tick(std::int64_t queue_bytes);

    // ACK stamping: never widens the window the sender will see.
    StampResult stamp_ack(Packet& pkt);

    void on_data_packet(const Packet& pkt, SimTime now);

    // Periodic liveness check; resets the flow count after idle_timeout
    // without data. Returns true if a reset happened.
    bool on_idle_check(SimTime now);

    std::int64_t rwnd_bytes() const { return rwnd_fx_ >> kFracBits; }
    int flow_count() const { return beta_; }
    bool in_slow_start() const { return slow_start_; }
    std::int64_t max_payload_seen() const { return mss_; }
    std::int64_t gamma_fx() const { return gamma_fx_; }
    int tick_count() const { return big_gamma_; }
    std::int64_t target_bytes() const { return target_bytes_; }
    const RwndqParams& params() const { return params_; }

    // Diagnostics.
    std::uint64_t acks_rewritten = 0;
    std::uint64_t acks_seen = 0;
    std::uint64_t invalid_scale_count = 0;
    std::uint64_t close_underflows = 0;
    std::uint64_t idle_resets = 0;

    static constexpr int kFracBits = 16;

  private:
    void reset_window();
    void apply_floor();

    RwndqParams params_;
    std::int64_t target_bytes_;   // alpha * B, rounded to bytes
    std::int64_t rwnd_fx_;        // local per-queue window (fixed point)
    std::int64_t gamma_fx_ = 0;   // accumulated increment (fixed point)
    int beta_ = 0;                // active flows
    int big_gamma_ = 0;           // ticks since last window update
    std::int64_t mss_ = 0;        // largest payload seen on this queue
    bool slow_start_ = true;
    SimTime last_data_at_ = 0;
};

} // namespace rwndq

#endif
