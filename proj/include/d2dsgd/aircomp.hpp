#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "d2dsgd/channel.hpp"
#include "d2dsgd/linalg.hpp"
#include "d2dsgd/scheduler.hpp"
#include "d2dsgd/topology.hpp"

namespace d2dsgd {

// Shared random projection, identical at every device for a given seed.
struct CompressionMatrix {
    int m = 0;
    int dim = 0;
    Mat a;  // m x dim, entries N(0, 1/m)
};

CompressionMatrix build_compression_matrix(std::uint64_t session_seed, int m, int dim);

// Default sparsity for the analog payloads: floor(d * (1 - 0.4^(1/K))).
int default_sparsity(int dim, int num_devices);

struct SparseVec {
    int dim = 0;
    std::vector<int> idx;  // ascending
    Vec val;

    Vec dense() const;
    double squared_norm() const;
};

// Keep the k largest-magnitude entries (ties to the lower index).
SparseVec sparsify_top_k(const Vec& v, int k);

Vec project(const CompressionMatrix& a, const SparseVec& s);  // A * s

// Per-block transmit scaling. gamma is the global gather-slot scale, beta the
// per-device broadcast amplitude; excluded_edge marks links in a deep fade
// for this block (no gather contribution, broadcast erased).
struct PowerScaling {
    double gamma = 1.0;
    Vec beta;
    std::vector<char> excluded_edge;
    double median_gain = 0.0;
};

// gamma = min over devices with gather transmissions of
//   pbar*N*n_c/(n_c+n_b) / (|phi_j|^2 * sum over served centers of |h'|^-2),
// the global genie minimum. beta_j spends the broadcast's share of the same
// budget split. Links with |h'|^2 below deep_fade_threshold * median link
// gain are excluded before the minimum is taken.
PowerScaling compute_power_scaling(const AnalogSchedule& schedule, const ConnectivityGraph& g,
                                   const BlockChannelState& channels, const Vec& phi_sq,
                                   const ChannelParams& params, double deep_fade_threshold);

// Largest per-device transmit energy of the block relative to pbar*N.
double audit_power_ratio(const AnalogSchedule& schedule, const ConnectivityGraph& g,
                         const BlockChannelState& channels, const Vec& phi_sq,
                         const PowerScaling& scaling, const ChannelParams& params);

// Gather-slot superposition at a center. Channel inversion cancels each h',
// so the output is sum of payloads plus Re{noise}/sqrt(gamma), noise variance
// N0/2 per real coordinate.
Vec aircomp_receive(const std::vector<const Vec*>& payloads, int m, double gamma,
                    const ChannelParams& params, std::uint64_t noise_seed, bool noise_on = true);

struct BroadcastResult {
    Vec y;
    bool erased = false;
};

// Broadcast-slot reception with receiver-side equalization: Re{y/h'}/beta.
// A link gain below min_gain is an erasure (payload treated as missing).
BroadcastResult broadcast_receive(const Vec& payload, std::complex<double> h_eff, double beta,
                                  double min_gain, const ChannelParams& params,
                                  std::uint64_t noise_seed, bool noise_on = true);

// LASSO solver for y = A x + noise: accelerated proximal gradient with step
// 1/L, then least-squares debiasing on the recovered support.
Vec sparse_recover(const Vec& y, const CompressionMatrix& a, double lambda, int iters);
Vec sparse_recover(const Vec& y, const CompressionMatrix& a, double lambda, int iters,
                   double lipschitz);

}  // namespace d2dsgd
