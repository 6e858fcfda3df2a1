#ifndef RWNDQ_SIM_TIME_HPP
#define RWNDQ_SIM_TIME_HPP

#include <cstdint>

namespace rwndq {

// Simulation time in integer picoseconds. Integer time keeps event ordering
// exact and runs reproducible; at 1 Gbps one bit on the wire is 1000 ps.
using SimTime = std::int64_t;

constexpr SimTime kPsPerNs = 1000;
constexpr SimTime kPsPerUs = 1000 * kPsPerNs;
constexpr SimTime kPsPerMs = 1000 * kPsPerUs;
constexpr SimTime kPsPerSec = 1000 * kPsPerMs;

constexpr SimTime time_from_us(std::int64_t us) { return us * kPsPerUs; }
constexpr SimTime time_from_ms(std::int64_t ms) { return ms * kPsPerMs; }
constexpr SimTime time_from_sec(double s) {
    return static_cast<SimTime>(s * static_cast<double>(kPsPerSec) + 0.5);
}
constexpr double time_to_sec(SimTime t) {
    return static_cast<double>(t) / static_cast<double>(kPsPerSec);
}

// Serialization delay of `bytes` on a link of `rate_bps` bits per second.
constexpr SimTime tx_time(std::int64_t bytes, std::int64_t rate_bps) {
    // bytes * 8 * 1e12 / rate; split to avoid overflow for large transfers
    return static_cast<SimTime>((static_cast<__int128>(bytes) * 8 * kPsPerSec) / rate_bps);
}

} // namespace rwndq

#endif
