#pragma once

#include <string>
#include <vector>

#include "d2dsgd/topology.hpp"

namespace d2dsgd {

// Interference graph for half-duplex D2D exchange: two devices conflict when
// they are adjacent or share a neighbor. Scheduling is proper coloring here.
ConnectivityGraph build_conflict_graph(const ConnectivityGraph& g);

// Greedy proper coloring visiting nodes in the given order; each node takes
// the smallest color unused by its already-colored neighbors. Colors are
// 0-based and contiguous.
std::vector<int> greedy_color(const ConnectivityGraph& g, const std::vector<int>& order);

struct DigitalSchedule {
    int num_slots = 0;
    std::vector<int> slot_of_node;        // color per node
    std::vector<std::vector<int>> slots;  // members per slot, ascending
    std::string text() const;
};

// One broadcast slot per conflict-graph color class, natural node order.
DigitalSchedule make_digital_schedule(const ConnectivityGraph& g);

struct AnalogRound {
    std::vector<int> centers;                       // gathering nodes, ascending
    std::vector<std::pair<int, int>> active_edges;  // canonical, each touches exactly one center
};

struct AnalogSchedule {
    int num_slots = 0;  // 2 * rounds(): a gather and a broadcast slot per round
    std::vector<AnalogRound> rounds;
    std::vector<int> tx_count_of;      // per node: center-directed transmissions across all rounds
    std::vector<int> center_count_of;  // per node: rounds where it broadcasts as a center (0 or 1)
    int round_count() const { return static_cast<int>(rounds.size()); }
    std::string text() const;
};

// Star-partition scheduling: repeatedly color the residual graph, take the
// color class covering the most residual edges (ties: fewer members, then
// lower color), make its members centers, retire their incident edges. Every
// edge lands in exactly one round.
AnalogSchedule make_analog_schedule(const ConnectivityGraph& g);

// Round-robin baselines: one slot (or one star) per node in index order.
DigitalSchedule make_digital_tdma_schedule(const ConnectivityGraph& g);
AnalogSchedule make_analog_tdma_schedule(const ConnectivityGraph& g);

}  // namespace d2dsgd
