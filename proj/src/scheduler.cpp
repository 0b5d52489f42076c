#include "d2dsgd/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "d2dsgd/errors.hpp"

namespace d2dsgd {

namespace {

bool share_neighbor(const ConnectivityGraph& g, int i, int j) {
    const auto& a = g.adj[i];
    const auto& b = g.adj[j];
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
        if (a[x] == b[y]) return true;
        if (a[x] < b[y]) ++x; else ++y;
    }
    return false;
}

}  // namespace

ConnectivityGraph build_conflict_graph(const ConnectivityGraph& g) {
    std::vector<std::pair<int, int>> edges = g.edges;
    std::vector<double> dists = g.edge_dist;
    for (int i = 0; i < g.node_count; ++i) {
        for (int j = i + 1; j < g.node_count; ++j) {
            if (g.has_edge(i, j)) continue;
            if (!share_neighbor(g, i, j)) continue;
            edges.emplace_back(i, j);
            double d = 0.0;
            if (!g.positions.empty())
                d = std::hypot(g.positions[i][0] - g.positions[j][0],
                               g.positions[i][1] - g.positions[j][1]);
            dists.push_back(d);
        }
    }
    return make_graph(g.node_count, std::move(edges), std::move(dists), g.positions);
}

std::vector<int> greedy_color(const ConnectivityGraph& g, const std::vector<int>& order) {
    const int n = g.node_count;
    if (static_cast<int>(order.size()) != n)
        throw ScheduleError("coloring order must visit every node once");
    std::vector<char> seen(n, 0);
    for (int v : order) {
        if (v < 0 || v >= n || seen[v])
            throw ScheduleError("coloring order must be a permutation of the nodes");
        seen[v] = 1;
    }

    std::vector<int> color(n, -1);
    std::vector<int> used(n + 1, -1);
    for (int v : order) {
        for (int u : g.adj[v])
            if (color[u] >= 0) used[color[u]] = v;
        int c = 0;
        while (used[c] == v) ++c;
        color[v] = c;
    }
    return color;
}

namespace {

std::vector<std::vector<int>> group_by_color(const std::vector<int>& color, int num_colors) {
    std::vector<std::vector<int>> classes(num_colors);
    for (std::size_t v = 0; v < color.size(); ++v)
        if (color[v] >= 0) classes[color[v]].push_back(static_cast<int>(v));
    return classes;
}

std::vector<int> natural_order(int n) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    return order;
}

}  // namespace

DigitalSchedule make_digital_schedule(const ConnectivityGraph& g) {
    const ConnectivityGraph conflict = build_conflict_graph(g);
    DigitalSchedule s;
    s.slot_of_node = greedy_color(conflict, natural_order(g.node_count));
    s.num_slots = 1 + *std::max_element(s.slot_of_node.begin(), s.slot_of_node.end());
    s.slots = group_by_color(s.slot_of_node, s.num_slots);

    for (const auto& [i, j] : conflict.edges)
        if (s.slot_of_node[i] == s.slot_of_node[j])
            throw ScheduleError("conflicting devices share a slot");
    return s;
}

DigitalSchedule make_digital_tdma_schedule(const ConnectivityGraph& g) {
    DigitalSchedule s;
    s.num_slots = g.node_count;
    s.slot_of_node = natural_order(g.node_count);
    s.slots.resize(g.node_count);
    for (int i = 0; i < g.node_count; ++i) s.slots[i] = {i};
    return s;
}

std::string DigitalSchedule::text() const {
    std::string out;
    char buf[32];
    for (int c = 0; c < num_slots; ++c) {
        std::snprintf(buf, sizeof buf, "slot %d:", c + 1);
        out += buf;
        for (int v : slots[c]) {
            std::snprintf(buf, sizeof buf, " %d", v + 1);
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

AnalogSchedule make_analog_schedule(const ConnectivityGraph& g) {
    const int n = g.node_count;
    std::vector<std::vector<char>> res(n, std::vector<char>(n, 0));
    std::vector<int> deg(n, 0);
    for (const auto& [i, j] : g.edges) {
        res[i][j] = res[j][i] = 1;
        ++deg[i];
        ++deg[j];
    }

    AnalogSchedule s;
    s.tx_count_of.assign(n, 0);
    s.center_count_of.assign(n, 0);
    std::vector<int> covered(g.edge_count(), 0);

    int remaining = g.edge_count();
    while (remaining > 0) {
        // Greedy-color the active residual subgraph in natural order.
        std::vector<int> color(n, -1);
        int num_colors = 0;
        {
            std::vector<char> used(n + 1, 0);
            for (int v = 0; v < n; ++v) {
                if (deg[v] == 0) continue;
                std::fill(used.begin(), used.begin() + num_colors + 1, 0);
                for (int u = 0; u < n; ++u)
                    if (res[v][u] && color[u] >= 0) used[color[u]] = 1;
                int c = 0;
                while (used[c]) ++c;
                color[v] = c;
                num_colors = std::max(num_colors, c + 1);
            }
        }

        const auto classes = group_by_color(color, num_colors);
        int best = -1;
        long best_score = -1;
        for (int c = 0; c < num_colors; ++c) {
            long score = 0;
            for (int v : classes[c]) score += deg[v];
            if (score > best_score ||
                (score == best_score && classes[c].size() < classes[best].size())) {
                best = c;
                best_score = score;
            }
        }
        if (best < 0) throw ScheduleError("residual graph has edges but no active nodes");

        AnalogRound round;
        round.centers = classes[best];
        std::vector<char> is_center(n, 0);
        for (int v : round.centers) is_center[v] = 1;

        for (int k = 0; k < g.edge_count(); ++k) {
            const auto [i, j] = g.edges[k];
            if (!res[i][j]) continue;
            if (is_center[i] && is_center[j])
                throw ScheduleError("two centers ended up adjacent");
            if (!is_center[i] && !is_center[j]) continue;
            round.active_edges.push_back(g.edges[k]);
            ++covered[k];
            const int tx = is_center[i] ? j : i;
            ++s.tx_count_of[tx];
            res[i][j] = res[j][i] = 0;
            --deg[i];
            --deg[j];
            --remaining;
        }
        for (int v : round.centers) ++s.center_count_of[v];
        s.rounds.push_back(std::move(round));
    }

    for (int k = 0; k < g.edge_count(); ++k)
        if (covered[k] != 1) throw ScheduleError("edge not covered exactly once");
    for (int v = 0; v < n; ++v)
        if (s.center_count_of[v] > 1) throw ScheduleError("node gathered in more than one round");

    s.num_slots = 2 * s.round_count();
    return s;
}

AnalogSchedule make_analog_tdma_schedule(const ConnectivityGraph& g) {
    AnalogSchedule s;
    const int n = g.node_count;
    s.tx_count_of.assign(n, 0);
    s.center_count_of.assign(n, 0);
    s.rounds.resize(n);
    for (int v = 0; v < n; ++v) {
        s.rounds[v].centers = {v};
        for (int u : g.adj[v]) {
            s.rounds[v].active_edges.emplace_back(std::min(u, v), std::max(u, v));
            ++s.tx_count_of[u];
        }
        std::sort(s.rounds[v].active_edges.begin(), s.rounds[v].active_edges.end());
        if (!s.rounds[v].active_edges.empty()) s.center_count_of[v] = 1;
    }
    s.num_slots = 2 * n;
    return s;
}

std::string AnalogSchedule::text() const {
    std::string out;
    char buf[40];
    for (int r = 0; r < round_count(); ++r) {
        std::snprintf(buf, sizeof buf, "round %d: centers", r + 1);
        out += buf;
        for (int v : rounds[r].centers) {
            std::snprintf(buf, sizeof buf, " %d", v + 1);
            out += buf;
        }
        out += " | edges";
        for (const auto& [i, j] : rounds[r].active_edges) {
            std::snprintf(buf, sizeof buf, " %d-%d", i + 1, j + 1);
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace d2dsgd
