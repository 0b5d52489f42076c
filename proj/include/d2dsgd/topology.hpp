#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "d2dsgd/linalg.hpp"

namespace d2dsgd {

// Undirected device-to-device connectivity graph. Edges are stored once in
// canonical form (i < j, lexicographically sorted) and every random draw that
// walks edges follows that order, which is what makes runs reproducible.
struct ConnectivityGraph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> edge_dist;                 // metres, aligned with edges
    std::vector<std::array<double, 2>> positions;  // empty when unknown
    std::vector<std::vector<int>> adj;             // sorted neighbor lists

    int edge_count() const { return static_cast<int>(edges.size()); }
    int degree(int i) const { return static_cast<int>(adj[i].size()); }
    bool has_edge(int i, int j) const { return edge_index(i, j) >= 0; }

    // Index into edges/edge_dist for the unordered pair, or -1.
    int edge_index(int i, int j) const;

    bool is_connected() const;

private:
    friend ConnectivityGraph make_graph(int, std::vector<std::pair<int, int>>, std::vector<double>,
                                        std::vector<std::array<double, 2>>);
    std::vector<int> lookup_;  // node_count * node_count -> edge index
};

// Validates, canonicalizes and indexes the edge set. dists may be empty when
// positions are given (distances are then computed), otherwise it must align
// with edges.
ConnectivityGraph make_graph(int node_count, std::vector<std::pair<int, int>> edges,
                             std::vector<double> dists = {},
                             std::vector<std::array<double, 2>> positions = {});

// Star topology with one gathering node at the origin plus fringe nodes at
// distance in (d_min, d_max], extended by Bernoulli(p) links between fringe
// node pairs.
ConnectivityGraph generate_star_extended(std::uint64_t seed, int node_count, double edge_prob,
                                         double d_min = 20.0, double d_max = 200.0);

// Removes each edge of base independently with the matching probability.
// block_prob is node_count x node_count and symmetric.
ConnectivityGraph generate_blockage_graph(std::uint64_t seed, const ConnectivityGraph& base,
                                          const Mat& block_prob);
ConnectivityGraph generate_blockage_graph(std::uint64_t seed, const ConnectivityGraph& base,
                                          double block_prob);

struct MixingMatrix {
    Mat w;
    double alpha = 0.0;
    double lambda_max = 0.0;       // largest Laplacian eigenvalue
    double connectivity = 0.0;     // second-smallest Laplacian eigenvalue
};

// Consensus weights from the graph Laplacian: alpha on edges, 1 - deg*alpha
// on the diagonal, alpha = 2 / (lambda_1 + lambda_{K-1}).
MixingMatrix build_mixing_matrix(const ConnectivityGraph& g);

// Text edge-list round trip. First line is the node count; each edge line is
// "i j dist" with 1-based endpoints and 6 decimal places.
std::string save_edge_list(const ConnectivityGraph& g);
ConnectivityGraph load_edge_list(const std::string& text);

void save_edge_list_file(const ConnectivityGraph& g, const std::string& path);
ConnectivityGraph load_edge_list_file(const std::string& path);

}  // namespace d2dsgd
