#include "rwndq/event.hpp"

namespace rwndq {

const char* event_kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::packet_arrival: return "packet_arrival";
    case EventKind::dequeue_complete: return "dequeue_complete";
    case EventKind::rwndq_tick: return "rwndq_tick";
    case EventKind::idle_check: return "idle_check";
    case EventKind::rto_expiry: return "rto_expiry";
    case EventKind::app_start: return "app_start";
    case EventKind::sim_end: return "sim_end";
    }
    return "unknown";
}

void EventQueue::schedule(SimTime time, EventKind kind, std::uint32_t target,
                          std::uint64_t a, std::uint64_t b,
                          std::optional<Packet> pkt) {
    if (time < now_) {
        throw SimError("event scheduled in the past");
    }
    Event ev;
    ev.time = time;
    ev.seq = next_seq_++;
    ev.kind = kind;
    ev.target = target;
    ev.a = a;
    ev.b = b;
    ev.pkt = std::move(pkt);
    heap_.push(std::move(ev));
}

void EventQueue::run_until(SimTime t,
                           const std::function<bool(Event&)>& handler) {
    while (!heap_.empty() && heap_.top().time <= t) {
        Event ev = heap_.top();
        heap_.pop();
        now_ = ev.time;
        if (!handler(ev)) {
            return;
        }
    }
    now_ = t;
}

} // namespace rwndq
