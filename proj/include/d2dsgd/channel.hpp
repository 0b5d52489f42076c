#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "d2dsgd/topology.hpp"

namespace d2dsgd {

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct ChannelParams {
    double a0 = db_to_linear(-33.5);  // reference path gain at d0
    double d0 = 1.0;                  // metres
    double pathloss_exp = 3.76;
    double n0 = dbm_to_watts(-169.0);  // noise power per channel use, watts
    double pbar = 1e-3;                // per-device average power budget, watts
    long n_uses = 30000;               // channel uses per communication block

    void validate() const;
};

// Per-block fading state. One complex coefficient per canonical edge; the
// channel is reciprocal, so an unordered pair shares a single draw.
struct BlockChannelState {
    long block = 0;
    std::vector<std::complex<double>> h;  // Rayleigh, CN(0,1), per edge
    std::vector<double> path_gain;        // a0 * (d0/d)^gamma, per edge

    // sqrt(path gain) * h, the coefficient the receiver actually sees.
    std::complex<double> effective_coeff(int edge) const {
        return std::sqrt(path_gain[edge]) * h[edge];
    }
    double effective_gain(int edge) const { return path_gain[edge] * std::norm(h[edge]); }
};

BlockChannelState sample_block_fading(std::uint64_t seed, long block, const ConnectivityGraph& g,
                                      const ChannelParams& params);

// Bit budget of one device's broadcast slot under equal slot split:
// floor(floor(N/M) * log2(1 + pbar*M/n0 * min_j g_ij)), minimum over its
// neighbors' links.
long digital_bits(int node, const ConnectivityGraph& g, const BlockChannelState& state,
                  const ChannelParams& params, int num_slots);

// Calibration probe: average (in dB) over sampled topologies and fading
// blocks of the worst effective link SNR pbar*g/n0 across connected pairs.
// This is the link that pins both the digital rate and the analog power
// scaling, which makes it the operating-point statistic worth tracking.
double measure_bottleneck_snr_db(std::uint64_t seed, int num_topologies, int blocks_per_topology,
                                 int node_count, double edge_prob, double d_min, double d_max,
                                 const ChannelParams& params);

}  // namespace d2dsgd
