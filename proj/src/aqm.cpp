#include "rwndq/aqm.hpp"

#include <cmath>

namespace rwndq {

std::int64_t RunningAvg32::update(std::int64_t queue_bytes, SimTime now) {
    if (last_sample_at_ < 0 || now - last_sample_at_ >= sample_period_) {
        if (count_ < kSlots) {
            count_ += 1;
        } else {
            sum_ -= ring_[next_];
        }
        ring_[next_] = queue_bytes;
        sum_ += queue_bytes;
        next_ = (next_ + 1) % kSlots;
        last_sample_at_ = now;
    }
    return average();
}

bool EcnMarker::maybe_mark(Packet& pkt, std::int64_t queue_bytes,
                           std::int64_t capacity_bytes, SimTime now) {
    std::int64_t q = use_average_ ? avg_.update(queue_bytes, now) : queue_bytes;
    std::int64_t threshold = static_cast<std::int64_t>(
        std::llround(threshold_fraction_ * static_cast<double>(capacity_bytes)));
    if (q < threshold) {
        return false;
    }
    return set_congestion_experienced(pkt);
}

} // namespace rwndq
