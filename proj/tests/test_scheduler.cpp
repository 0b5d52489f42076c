#include "doctest.h"

#include "d2dsgd/errors.hpp"
#include "d2dsgd/scheduler.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace d2dsgd;

namespace {

ConnectivityGraph path(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    return make_graph(n, edges, std::vector<double>(edges.size(), 1.0));
}

ConnectivityGraph star(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) edges.push_back({0, i});
    return make_graph(n, edges, std::vector<double>(edges.size(), 1.0));
}

// Every conflict-graph edge must separate its endpoints into distinct slots.
bool slots_are_independent(const ConnectivityGraph& g, const DigitalSchedule& s) {
    auto conflict = build_conflict_graph(g);
    for (auto [a, b] : conflict.edges) {
        if (s.slot_of_node[a] == s.slot_of_node[b]) return false;
    }
    return true;
}

// Each connectivity edge appears in exactly one round and touches one center.
bool covers_every_edge_once(const ConnectivityGraph& g, const AnalogSchedule& s) {
    std::map<std::pair<int, int>, int> seen;
    for (const auto& round : s.rounds) {
        std::set<int> centers(round.centers.begin(), round.centers.end());
        for (auto e : round.active_edges) {
            ++seen[e];
            const bool a = centers.count(e.first) > 0;
            const bool b = centers.count(e.second) > 0;
            if (a == b) return false;
        }
    }
    if (seen.size() != g.edges.size()) return false;
    for (auto& [e, n] : seen) {
        if (n != 1) return false;
        if (g.edge_index(e.first, e.second) < 0) return false;
    }
    return true;
}

int max_degree(const ConnectivityGraph& g) {
    int d = 0;
    for (int i = 0; i < g.node_count; ++i) d = std::max(d, g.degree(i));
    return d;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("conflict graph adds common-neighbor pairs") {
    auto g = path(3);
    auto c = build_conflict_graph(g);
    REQUIRE(c.edge_count() == 3);
    CHECK(c.has_edge(0, 1));
    CHECK(c.has_edge(1, 2));
    CHECK(c.has_edge(0, 2));
}

TEST_CASE("conflict graph of a star is complete") {
    auto c = build_conflict_graph(star(8));
    CHECK(c.edge_count() == 8 * 7 / 2);
}

TEST_CASE("greedy coloring honors the visit order and rejects bad orders") {
    auto g = path(3);
    auto colors = greedy_color(g, {0, 1, 2});
    CHECK(colors == std::vector<int>{0, 1, 0});
    CHECK_THROWS_AS(greedy_color(g, {0, 1}), ScheduleError);
    CHECK_THROWS_AS(greedy_color(g, {0, 1, 1}), ScheduleError);
    CHECK_THROWS_AS(greedy_color(g, {0, 1, 3}), ScheduleError);
}

TEST_CASE("three node chain needs three digital slots") {
    auto s = make_digital_schedule(path(3));
    CHECK(s.num_slots == 3);
    CHECK(s.slot_of_node == std::vector<int>{0, 1, 2});
}

TEST_CASE("four node chain reuses a slot across the ends") {
    auto s = make_digital_schedule(path(4));
    CHECK(s.num_slots == 3);
    CHECK(s.slots[0] == std::vector<int>{0, 3});
    CHECK(s.slots[1] == std::vector<int>{1});
    CHECK(s.slots[2] == std::vector<int>{2});
}

TEST_CASE("star of eight devices serializes completely") {
    auto s = make_digital_schedule(star(8));
    CHECK(s.num_slots == 8);
    for (int i = 0; i < 8; ++i) CHECK(s.slot_of_node[i] == i);
}

TEST_CASE("digital tdma gives one slot per device") {
    auto s = make_digital_tdma_schedule(star(5));
    CHECK(s.num_slots == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(s.slots[i] == std::vector<int>{i});
    }
}

TEST_CASE("analog schedule of a chain gathers at the middle") {
    auto s = make_analog_schedule(path(3));
    REQUIRE(s.round_count() == 1);
    CHECK(s.num_slots == 2);
    CHECK(s.rounds[0].centers == std::vector<int>{1});
    CHECK(s.rounds[0].active_edges.size() == 2);
    CHECK(s.tx_count_of == std::vector<int>{1, 0, 1});
    CHECK(s.center_count_of == std::vector<int>{0, 1, 0});
}

TEST_CASE("analog schedule of a star is a single round at the hub") {
    auto s = make_analog_schedule(star(8));
    REQUIRE(s.round_count() == 1);
    CHECK(s.rounds[0].centers == std::vector<int>{0});
    CHECK(s.rounds[0].active_edges.size() == 7);
    CHECK(s.center_count_of[0] == 1);
    for (int i = 1; i < 8; ++i) CHECK(s.tx_count_of[i] == 1);
}

TEST_CASE("analog schedule of a four node chain finishes in one round") {
    auto s = make_analog_schedule(path(4));
    REQUIRE(s.round_count() == 1);
    CHECK(s.rounds[0].centers == std::vector<int>{0, 2});
    CHECK(covers_every_edge_once(path(4), s));
}

TEST_CASE("analog tdma visits every device as a center") {
    auto g = path(3);
    auto s = make_analog_tdma_schedule(g);
    CHECK(s.num_slots == 6);
    REQUIRE(s.round_count() == 3);
    CHECK(s.rounds[0].active_edges.size() == 1);
    CHECK(s.rounds[1].active_edges.size() == 2);
    CHECK(s.rounds[2].active_edges.size() == 1);
    CHECK(s.tx_count_of == std::vector<int>{1, 2, 1});
    CHECK(s.center_count_of == std::vector<int>{1, 1, 1});
}

TEST_CASE("analog tdma covers each edge from both endpoints") {
    auto g = generate_star_extended(31, 9, 0.4);
    auto s = make_analog_tdma_schedule(g);
    CHECK(s.num_slots == 2 * 9);
    std::map<std::pair<int, int>, int> seen;
    for (const auto& round : s.rounds) {
        for (auto e : round.active_edges) ++seen[e];
    }
    REQUIRE(seen.size() == g.edges.size());
    for (auto& [e, n] : seen) CHECK(n == 2);
}

TEST_CASE("random graphs always produce valid schedules") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const int n = 2 + static_cast<int>(seed % 15);
        const double p = static_cast<double>(seed % 101) / 100.0;
        auto g = generate_star_extended(seed, n, p);
        auto dig = make_digital_schedule(g);
        CHECK(slots_are_independent(g, dig));
        CHECK(dig.num_slots <= max_degree(build_conflict_graph(g)) + 1);
        auto ana = make_analog_schedule(g);
        CHECK(covers_every_edge_once(g, ana));
        CHECK(ana.num_slots == 2 * ana.round_count());
        for (int v = 0; v < n; ++v) CHECK(ana.center_count_of[v] <= 1);
    }
}

TEST_CASE("schedule summaries render without crashing") {
    auto g = generate_star_extended(8, 6, 0.5);
    CHECK(!make_digital_schedule(g).text().empty());
    CHECK(!make_analog_schedule(g).text().empty());
}

}
