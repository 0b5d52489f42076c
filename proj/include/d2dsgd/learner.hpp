#pragma once

#include <cstdint>
#include <vector>

#include "d2dsgd/aircomp.hpp"
#include "d2dsgd/channel.hpp"
#include "d2dsgd/compression.hpp"
#include "d2dsgd/data.hpp"
#include "d2dsgd/linalg.hpp"
#include "d2dsgd/rng.hpp"
#include "d2dsgd/scheduler.hpp"
#include "d2dsgd/topology.hpp"

namespace d2dsgd {

// Linear softmax classifier; parameters are the C x F weight block flattened
// row-major followed by C biases.
struct Model {
    int feature_dim = 0;
    int classes = 0;
    int dim() const { return (feature_dim + 1) * classes; }
};

struct LearningConfig {
    double eta0 = 0.05;
    double eta_decay = 500.0;  // iterations until the rate halves
    int tau = 10;              // consensus period
    int batch_size = 32;

    double eta(long t) const { return eta0 / (1.0 + static_cast<double>(t) / eta_decay); }
    void validate() const;
};

struct DeviceState {
    int id = 0;
    Vec theta;
    Vec error;               // compression error carried to the next block
    std::vector<int> shard;  // sample indices into the shared training set
    Rng batch_rng;

    DeviceState(int id_, int dim, std::vector<int> shard_, std::uint64_t batch_seed)
        : id(id_), theta(dim, 0.0), error(dim, 0.0), shard(std::move(shard_)), batch_rng(batch_seed) {}
};

// Counters for behavioral assertions (mode isolation, accounting, fades).
struct RunStats {
    long blocks = 0;
    long local_steps = 0;
    long consensus_rounds = 0;
    long fading_draws = 0;
    long schedule_builds = 0;
    long mixing_builds = 0;
    long digital_transmissions = 0;
    long digital_zero_budget = 0;
    long error_updates = 0;
    long aircomp_receptions = 0;
    long broadcast_receptions = 0;
    long broadcast_erasures = 0;
    long deep_fade_exclusions = 0;
    long recoveries = 0;
    long exact_payload_blocks = 0;
    long power_violations = 0;
    double max_power_ratio = 0.0;
};

double loss_and_grad(const Model& model, const Vec& theta, const Dataset& data,
                     const std::vector<int>& batch, Vec& grad);

// batch_size distinct samples from the shard (the whole shard if smaller).
// Consumes exactly min(batch_size, shard size) integer draws.
std::vector<int> draw_batch(Rng& rng, const std::vector<int>& shard, int batch_size);

void local_step(DeviceState& dev, const Model& model, const Dataset& data, long t,
                const LearningConfig& cfg);

// Consensus with perfect parameter exchange.
void ideal_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix, const Model& model,
                     const Dataset& data, long t, const LearningConfig& cfg);

struct DigitalOptions {
    QuantConfig quant;
    bool lossless = false;  // diagnostic: skip compression, exchange exact parameters
};

// Consensus over rate-limited broadcast slots: each device sends a compressed
// error-compensated parameter within its per-block bit budget.
void digital_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix,
                       const ConnectivityGraph& g, const DigitalSchedule& schedule,
                       const BlockChannelState& chan, const ChannelParams& params,
                       const DigitalOptions& opts, const Model& model, const Dataset& data,
                       long t, const LearningConfig& cfg, RunStats& stats);

struct AnalogOptions {
    int sparsity_k = 0;
    double lambda_scale = 1.0;
    int lasso_iters = 200;
    double deep_fade_threshold = 1e-2;
    bool noise_on = true;
    bool exact_payloads = false;     // m >= d: skip the projection, transfer payloads exactly
    double lipschitz = 0.0;          // cached power-iteration result for the shared matrix
    std::uint64_t noise_seed = 0;    // per-block noise stream root
};

// Consensus over analog superposition rounds: gather slots add the neighbors'
// projected payloads over the air, broadcast slots return the center's, and
// receivers recover the sparse sums before mixing.
void analog_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix,
                      const ConnectivityGraph& g, const AnalogSchedule& schedule,
                      const CompressionMatrix* matrix, const BlockChannelState& chan,
                      const ChannelParams& params, const AnalogOptions& opts, const Model& model,
                      const Dataset& data, long t, const LearningConfig& cfg, RunStats& stats);

// Top-1 accuracy of a single parameter vector over a dataset.
double model_accuracy(const Model& model, const Vec& theta, const Dataset& data);

}  // namespace d2dsgd
