#include "d2dsgd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "d2dsgd/errors.hpp"
#include "d2dsgd/rng.hpp"

namespace d2dsgd {

void ChannelParams::validate() const {
    if (!(a0 > 0.0) || !std::isfinite(a0)) throw ConfigError("reference path gain must be positive");
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw ConfigError("reference distance must be positive");
    if (!(pathloss_exp > 0.0) || !std::isfinite(pathloss_exp))
        throw ConfigError("path loss exponent must be positive");
    if (!(n0 > 0.0) || !std::isfinite(n0)) throw ConfigError("noise power must be positive");
    if (!(pbar > 0.0) || !std::isfinite(pbar)) throw ConfigError("power budget must be positive");
    if (n_uses < 1) throw ConfigError("need at least one channel use per block");
}

BlockChannelState sample_block_fading(std::uint64_t seed, long block, const ConnectivityGraph& g,
                                      const ChannelParams& params) {
    params.validate();
    if (block < 0) throw ConfigError("block index must be non-negative");

    BlockChannelState st;
    st.block = block;
    st.h.resize(g.edge_count());
    st.path_gain.resize(g.edge_count());

    Rng rng(derive_seed(seed, Stream::fading, static_cast<std::uint64_t>(block)));
    for (int k = 0; k < g.edge_count(); ++k) {
        const double d = g.edge_dist[k];
        if (!(d > 0.0)) throw TopologyError("fading needs positive link distances");
        st.path_gain[k] = params.a0 * std::pow(params.d0 / d, params.pathloss_exp);
        st.h[k] = rng.cnormal();
    }
    return st;
}

long digital_bits(int node, const ConnectivityGraph& g, const BlockChannelState& state,
                  const ChannelParams& params, int num_slots) {
    params.validate();
    if (node < 0 || node >= g.node_count) throw ScheduleError("node out of range");
    if (num_slots < 1) throw ScheduleError("need at least one slot");
    if (g.degree(node) == 0) throw ScheduleError("device has no neighbors to serve");

    double g_min = std::numeric_limits<double>::infinity();
    for (int u : g.adj[node]) {
        const int e = g.edge_index(node, u);
        g_min = std::min(g_min, state.effective_gain(e));
    }

    const double uses = std::floor(static_cast<double>(params.n_uses) / num_slots);
    const double snr = params.pbar * num_slots / params.n0 * g_min;
    const double rate = std::log2(1.0 + snr);
    return static_cast<long>(std::floor(uses * rate));
}

double measure_bottleneck_snr_db(std::uint64_t seed, int num_topologies, int blocks_per_topology,
                                 int node_count, double edge_prob, double d_min, double d_max,
                                 const ChannelParams& params) {
    params.validate();
    if (num_topologies < 1 || blocks_per_topology < 1)
        throw ConfigError("need at least one topology and one block");

    double acc = 0.0;
    long n = 0;
    for (int t = 0; t < num_topologies; ++t) {
        const std::uint64_t ep_seed = derive_seed(seed, Stream::topology, static_cast<std::uint64_t>(t), 0xca11);
        const ConnectivityGraph g = generate_star_extended(ep_seed, node_count, edge_prob, d_min, d_max);
        for (int b = 0; b < blocks_per_topology; ++b) {
            const BlockChannelState st = sample_block_fading(ep_seed, b, g, params);
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 0; k < g.edge_count(); ++k)
                worst = std::min(worst, params.pbar * st.effective_gain(k) / params.n0);
            acc += linear_to_db(worst);
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

}  // namespace d2dsgd
