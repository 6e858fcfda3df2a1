#ifndef RWNDQ_EVENT_HPP
#define RWNDQ_EVENT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "rwndq/packet.hpp"
#include "rwndq/sim_time.hpp"

namespace rwndq {

// Raised on engine bugs (scheduling into the past, conservation breaches).
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EventKind : std::uint8_t {
    packet_arrival,
    dequeue_complete,
    rwndq_tick,
    idle_check,
    rto_expiry,
    app_start,
    sim_end,
};

const char* event_kind_name(EventKind kind);

struct Event {
    SimTime time = 0;
    std::uint64_t seq = 0; // schedule order, breaks time ties
    EventKind kind = EventKind::sim_end;
    std::uint32_t target = 0;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::optional<Packet> pkt;
};

// Deterministic discrete-event queue: events run in (time, schedule-seq)
// order, so same-time events execute in insertion order.
class EventQueue {
  public:
    void schedule(SimTime time, EventKind kind, std::uint32_t target,
                  std::uint64_t a = 0, std::uint64_t b = 0,
                  std::optional<Packet> pkt = std::nullopt);

    // Runs events with time <= t. The handler returns false to stop early.
    // On return the clock is at t (or at the stopping event's time).
    void run_until(SimTime t, const std::function<bool(Event&)>& handler);

    SimTime now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t pending() const { return heap_.size(); }

  private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
};

} // namespace rwndq

#endif
