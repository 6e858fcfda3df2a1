#ifndef RWNDQ_AQM_HPP
#define RWNDQ_AQM_HPP

#include <array>
#include <cstdint>

#include "rwndq/packet.hpp"
#include "rwndq/sim_time.hpp"

namespace rwndq {

enum class AdmitDecision {
    enqueue,
    drop,
};

// Tail drop with an inclusive boundary: a packet that exactly fills the
// buffer is admitted.
inline AdmitDecision droptail_admit(std::int64_t queue_bytes,
                                    std::int64_t capacity_bytes,
                                    std::int64_t pkt_size) {
    return queue_bytes + pkt_size <= capacity_bytes ? AdmitDecision::enqueue
                                                    : AdmitDecision::drop;
}

// Running average of queue occupancy over the last 32 samples, one sample at
// most every sample_period. Until the ring is warm the mean covers the
// samples pushed so far.
class RunningAvg32 {
  public:
    static constexpr int kSlots = 32;

    explicit RunningAvg32(SimTime sample_period = time_from_us(48))
        : sample_period_(sample_period) {}

    std::int64_t update(std::int64_t queue_bytes, SimTime now);

    std::int64_t average() const {
        return count_ == 0 ? 0 : sum_ / count_;
    }
    int sample_count() const { return count_; }

  private:
    SimTime sample_period_;
    SimTime last_sample_at_ = -1;
    std::array<std::int64_t, kSlots> ring_{};
    int next_ = 0;
    int count_ = 0;
    std::int64_t sum_ = 0;
};

// DCTCP-style marking: CE whenever occupancy reaches a fraction of the
// buffer. Instantaneous occupancy by default; the 32-sample average is the
// configurable alternative.
class EcnMarker {
  public:
    EcnMarker(double threshold_fraction, bool use_average,
              SimTime sample_period)
        : threshold_fraction_(threshold_fraction),
          use_average_(use_average),
          avg_(sample_period) {}

    EcnMarker() : EcnMarker(0.25, false, time_from_us(48)) {}

    // Returns true if the packet was marked (requires an ECT codepoint).
    bool maybe_mark(Packet& pkt, std::int64_t queue_bytes,
                    std::int64_t capacity_bytes, SimTime now);

    double threshold_fraction() const { return threshold_fraction_; }
    RunningAvg32& avg() { return avg_; }

  private:
    double threshold_fraction_;
    bool use_average_;
    RunningAvg32 avg_;
};

} // namespace rwndq

#endif
