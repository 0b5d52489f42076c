#include "d2dsgd/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

#include "d2dsgd/errors.hpp"
#include "d2dsgd/rng.hpp"

namespace d2dsgd {

int ConnectivityGraph::edge_index(int i, int j) const {
    if (i < 0 || j < 0 || i >= node_count || j >= node_count || i == j) return -1;
    return lookup_[static_cast<std::size_t>(i) * node_count + j];
}

bool ConnectivityGraph::is_connected() const {
    if (node_count <= 1) return node_count == 1;
    std::vector<char> seen(node_count, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
        }
    }
    return reached == node_count;
}

ConnectivityGraph make_graph(int node_count, std::vector<std::pair<int, int>> edges,
                             std::vector<double> dists,
                             std::vector<std::array<double, 2>> positions) {
    if (node_count < 1) throw TopologyError("graph needs at least one node");
    if (!positions.empty() && static_cast<int>(positions.size()) != node_count)
        throw TopologyError("positions must cover every node");
    if (!dists.empty() && dists.size() != edges.size())
        throw TopologyError("edge distances must align with edges");

    for (auto& e : edges) {
        if (e.first == e.second) throw TopologyError("self loops are not allowed");
        if (e.first < 0 || e.second < 0 || e.first >= node_count || e.second >= node_count)
            throw TopologyError("edge endpoint out of range");
        if (e.first > e.second) std::swap(e.first, e.second);
    }

    std::vector<int> order(edges.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return edges[a] < edges[b]; });

    ConnectivityGraph g;
    g.node_count = node_count;
    g.positions = std::move(positions);
    g.edges.reserve(edges.size());
    g.edge_dist.reserve(edges.size());
    for (int k : order) {
        if (!g.edges.empty() && g.edges.back() == edges[k])
            throw TopologyError("duplicate edge");
        g.edges.push_back(edges[k]);
        double d = 0.0;
        if (!dists.empty()) {
            d = dists[k];
        } else if (!g.positions.empty()) {
            const auto& pa = g.positions[edges[k].first];
            const auto& pb = g.positions[edges[k].second];
            d = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
        }
        if (!(d >= 0.0) || !std::isfinite(d)) throw TopologyError("edge distance must be finite and non-negative");
        g.edge_dist.push_back(d);
    }

    g.adj.assign(node_count, {});
    g.lookup_.assign(static_cast<std::size_t>(node_count) * node_count, -1);
    for (int k = 0; k < g.edge_count(); ++k) {
        const auto [i, j] = g.edges[k];
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
        g.lookup_[static_cast<std::size_t>(i) * node_count + j] = k;
        g.lookup_[static_cast<std::size_t>(j) * node_count + i] = k;
    }
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

ConnectivityGraph generate_star_extended(std::uint64_t seed, int node_count, double edge_prob,
                                         double d_min, double d_max) {
    if (node_count < 2) throw ConfigError("star topology needs at least two nodes");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge probability must lie in [0, 1]");
    if (!(d_min > 0.0) || !(d_max > d_min)) throw ConfigError("need 0 < d_min < d_max");

    Rng rng(derive_seed(seed, Stream::topology));

    std::vector<std::array<double, 2>> pos(node_count);
    pos[0] = {0.0, 0.0};
    for (int i = 1; i < node_count; ++i) {
        const double r = rng.uniform_in(d_min, d_max);
        const double a = 2.0 * M_PI * rng.uniform();
        pos[i] = {r * std::cos(a), r * std::sin(a)};
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < node_count; ++i) edges.emplace_back(0, i);
    for (int i = 1; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j)
            if (rng.uniform() < edge_prob) edges.emplace_back(i, j);

    return make_graph(node_count, std::move(edges), {}, std::move(pos));
}

namespace {

ConnectivityGraph apply_blockage(std::uint64_t seed, const ConnectivityGraph& base,
                                 const Mat* prob_matrix, double prob_uniform) {
    Rng rng(derive_seed(seed, Stream::blockage));
    std::vector<std::pair<int, int>> edges;
    std::vector<double> dists;
    for (int k = 0; k < base.edge_count(); ++k) {
        const auto [i, j] = base.edges[k];
        const double p = prob_matrix ? (*prob_matrix)(i, j) : prob_uniform;
        if (rng.uniform() >= p) {
            edges.push_back(base.edges[k]);
            dists.push_back(base.edge_dist[k]);
        }
    }
    return make_graph(base.node_count, std::move(edges), std::move(dists), base.positions);
}

}  // namespace

ConnectivityGraph generate_blockage_graph(std::uint64_t seed, const ConnectivityGraph& base,
                                          const Mat& block_prob) {
    if (block_prob.rows != base.node_count || block_prob.cols != base.node_count)
        throw ConfigError("blockage matrix must be node_count x node_count");
    for (int i = 0; i < block_prob.rows; ++i) {
        for (int j = 0; j < block_prob.cols; ++j) {
            const double p = block_prob(i, j);
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("blockage probabilities must lie in [0, 1]");
            if (std::abs(p - block_prob(j, i)) > 1e-12) throw ConfigError("blockage matrix must be symmetric");
        }
    }
    return apply_blockage(seed, base, &block_prob, 0.0);
}

ConnectivityGraph generate_blockage_graph(std::uint64_t seed, const ConnectivityGraph& base,
                                          double block_prob) {
    if (!(block_prob >= 0.0 && block_prob <= 1.0)) throw ConfigError("blockage probability must lie in [0, 1]");
    return apply_blockage(seed, base, nullptr, block_prob);
}

MixingMatrix build_mixing_matrix(const ConnectivityGraph& g) {
    if (!g.is_connected()) throw TopologyError("mixing matrix requires a connected graph");

    MixingMatrix mm;
    const int n = g.node_count;
    if (n == 1) {
        mm.w = Mat(1, 1);
        mm.w(0, 0) = 1.0;
        return mm;
    }

    Mat lap(n, n);
    for (int i = 0; i < n; ++i) lap(i, i) = static_cast<double>(g.degree(i));
    for (const auto& [i, j] : g.edges) {
        lap(i, j) = -1.0;
        lap(j, i) = -1.0;
    }

    const SymEigen eig = jacobi_eigen(lap);
    mm.lambda_max = eig.values[0];
    mm.connectivity = eig.values[n - 2];
    if (!(mm.lambda_max + mm.connectivity > 0.0))
        throw NumericError("degenerate Laplacian spectrum");
    mm.alpha = 2.0 / (mm.lambda_max + mm.connectivity);

    mm.w = Mat(n, n);
    for (int i = 0; i < n; ++i) mm.w(i, i) = 1.0 - g.degree(i) * mm.alpha;
    for (const auto& [i, j] : g.edges) {
        mm.w(i, j) = mm.alpha;
        mm.w(j, i) = mm.alpha;
    }
    return mm;
}

std::string save_edge_list(const ConnectivityGraph& g) {
    std::string out = std::to_string(g.node_count);
    out.push_back('\n');
    char line[96];
    for (int k = 0; k < g.edge_count(); ++k) {
        std::snprintf(line, sizeof line, "%d %d %.6f\n", g.edges[k].first + 1,
                      g.edges[k].second + 1, g.edge_dist[k]);
        out += line;
    }
    return out;
}

ConnectivityGraph load_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int node_count = -1;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> dists;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        if (node_count < 0) {
            if (!(ls >> node_count) || node_count < 1)
                throw FormatError("edge list line " + std::to_string(line_no) + ": bad node count");
            std::string extra;
            if (ls >> extra)
                throw FormatError("edge list line " + std::to_string(line_no) + ": trailing tokens");
            continue;
        }
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        int i = 0, j = 0;
        double d = 0.0;
        if (!(ls >> i >> j >> d))
            throw FormatError("edge list line " + std::to_string(line_no) + ": expected 'i j dist'");
        std::string extra;
        if (ls >> extra)
            throw FormatError("edge list line " + std::to_string(line_no) + ": trailing tokens");
        if (i < 1 || j < 1 || i > node_count || j > node_count)
            throw FormatError("edge list line " + std::to_string(line_no) + ": endpoint out of range");
        if (i == j)
            throw FormatError("edge list line " + std::to_string(line_no) + ": self loop");
        if (!(d > 0.0) || !std::isfinite(d))
            throw FormatError("edge list line " + std::to_string(line_no) + ": distance must be positive");
        edges.emplace_back(i - 1, j - 1);
        dists.push_back(d);
    }
    if (node_count < 1) throw FormatError("edge list is empty");
    try {
        return make_graph(node_count, std::move(edges), std::move(dists));
    } catch (const TopologyError& e) {
        throw FormatError(std::string("edge list: ") + e.what());
    }
}

void save_edge_list_file(const ConnectivityGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << save_edge_list(g);
    if (!out) throw FormatError("failed writing '" + path + "'");
}

ConnectivityGraph load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_edge_list(ss.str());
}

}  // namespace d2dsgd
