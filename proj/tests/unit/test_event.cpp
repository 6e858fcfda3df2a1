#include <doctest.h>

#include <vector>

#include "rwndq/event.hpp"

using namespace rwndq;

TEST_CASE("same-time events run in insertion order") {
    EventQueue queue;
    queue.schedule(100, EventKind::app_start, 1);
    queue.schedule(100, EventKind::app_start, 2);
    queue.schedule(50, EventKind::app_start, 0);
    std::vector<std::uint32_t> order;
    queue.run_until(200, [&](Event& ev) {
        order.push_back(ev.target);
        return true;
    });
    CHECK(order == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(queue.now() == 200);
}

TEST_CASE("run_until on an empty queue just advances the clock") {
    EventQueue queue;
    queue.run_until(12345, [](Event&) { return true; });
    CHECK(queue.now() == 12345);
}

TEST_CASE("events beyond the horizon stay queued") {
    EventQueue queue;
    queue.schedule(500, EventKind::sim_end, 0);
    int fired = 0;
    queue.run_until(100, [&](Event&) {
        fired += 1;
        return true;
    });
    CHECK(fired == 0);
    CHECK(queue.pending() == 1);
    queue.run_until(500, [&](Event&) {
        fired += 1;
        return true;
    });
    CHECK(fired == 1);
}

TEST_CASE("scheduling into the past is a hard error") {
    EventQueue queue;
    queue.schedule(10, EventKind::app_start, 0);
    queue.run_until(10, [](Event&) { return true; });
    CHECK_THROWS_AS(queue.schedule(5, EventKind::app_start, 0), SimError);
}

TEST_CASE("handler can stop the loop early") {
    EventQueue queue;
    for (int i = 0; i < 5; ++i) {
        queue.schedule(i * 10, EventKind::app_start, static_cast<std::uint32_t>(i));
    }
    int fired = 0;
    queue.run_until(1000, [&](Event& ev) {
        fired += 1;
        return ev.target != 2;
    });
    CHECK(fired == 3);
    CHECK(queue.now() == 20);
    CHECK(queue.pending() == 2);
}
