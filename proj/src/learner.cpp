#include "d2dsgd/learner.hpp"

#include <algorithm>
#include <cmath>

#include "d2dsgd/errors.hpp"

namespace d2dsgd {

void LearningConfig::validate() const {
    if (!(eta0 >= 0.0) || !std::isfinite(eta0)) throw ConfigError("learning rate must be non-negative");
    if (!(eta_decay > 0.0)) throw ConfigError("learning rate decay scale must be positive");
    if (tau < 1) throw ConfigError("consensus period must be at least 1");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
}

double loss_and_grad(const Model& model, const Vec& theta, const Dataset& data,
                     const std::vector<int>& batch, Vec& grad) {
    if (batch.empty()) throw ConfigError("loss_and_grad: empty batch");
    if (model.feature_dim != data.feature_dim) throw ConfigError("loss_and_grad: feature dimension mismatch");
    if (static_cast<int>(theta.size()) != model.dim()) throw NumericError("loss_and_grad: parameter size mismatch");

    const int f_dim = model.feature_dim;
    const int c_dim = model.classes;
    const double* bias = theta.data() + static_cast<std::size_t>(c_dim) * f_dim;

    grad.assign(theta.size(), 0.0);
    double* gbias = grad.data() + static_cast<std::size_t>(c_dim) * f_dim;
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    double loss = 0.0;
    Vec logits(c_dim);
    for (int s : batch) {
        const double* x = data.sample(s);
        const int y = data.labels[s];
        for (int c = 0; c < c_dim; ++c) {
            const double* w = theta.data() + static_cast<std::size_t>(c) * f_dim;
            double z = bias[c];
            for (int f = 0; f < f_dim; ++f) z += w[f] * x[f];
            if (!std::isfinite(z)) throw NumericError("loss_and_grad: non-finite logit");
            logits[c] = z;
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        double zsum = 0.0;
        for (int c = 0; c < c_dim; ++c) {
            logits[c] = std::exp(logits[c] - zmax);
            zsum += logits[c];
        }
        loss -= std::log(logits[y] / zsum) * inv_n;
        for (int c = 0; c < c_dim; ++c) {
            const double coef = (logits[c] / zsum - (c == y ? 1.0 : 0.0)) * inv_n;
            double* gw = grad.data() + static_cast<std::size_t>(c) * f_dim;
            for (int f = 0; f < f_dim; ++f) gw[f] += coef * x[f];
            gbias[c] += coef;
        }
    }
    return loss;
}

std::vector<int> draw_batch(Rng& rng, const std::vector<int>& shard, int batch_size) {
    if (shard.empty()) throw ConfigError("draw_batch: empty shard");
    const int n = static_cast<int>(shard.size());
    const int take = std::min(batch_size, n);
    std::vector<int> pool = shard;
    std::vector<int> batch(take);
    for (int i = 0; i < take; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
        batch[i] = pool[i];
    }
    return batch;
}

void local_step(DeviceState& dev, const Model& model, const Dataset& data, long t,
                const LearningConfig& cfg) {
    const std::vector<int> batch = draw_batch(dev.batch_rng, dev.shard, cfg.batch_size);
    Vec grad;
    loss_and_grad(model, dev.theta, data, batch, grad);
    axpy(-cfg.eta(t), grad, dev.theta);
}

namespace {

// All consensus variants stage their updates: gradients and payloads are
// functions of the pre-update parameters only, then everything commits.
std::vector<Vec> staged_gradients(std::vector<DeviceState>& devs, const Model& model,
                                  const Dataset& data, const LearningConfig& cfg) {
    std::vector<Vec> grads(devs.size());
    for (std::size_t i = 0; i < devs.size(); ++i) {
        const std::vector<int> batch = draw_batch(devs[i].batch_rng, devs[i].shard, cfg.batch_size);
        loss_and_grad(model, devs[i].theta, data, batch, grads[i]);
    }
    return grads;
}

}  // namespace

void ideal_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix, const Model& model,
                     const Dataset& data, long t, const LearningConfig& cfg) {
    const int n = static_cast<int>(devs.size());
    const std::vector<Vec> grads = staged_gradients(devs, model, data, cfg);
    const double eta = cfg.eta(t);

    std::vector<Vec> next(n);
    for (int i = 0; i < n; ++i) {
        Vec acc(devs[i].theta.size(), 0.0);
        for (int j = 0; j < n; ++j) {
            const double w = mix.w(i, j);
            if (w != 0.0) axpy(w, devs[j].theta, acc);
        }
        axpy(-eta, grads[i], acc);
        next[i] = std::move(acc);
    }
    for (int i = 0; i < n; ++i) devs[i].theta = std::move(next[i]);
}

void digital_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix,
                       const ConnectivityGraph& g, const DigitalSchedule& schedule,
                       const BlockChannelState& chan, const ChannelParams& params,
                       const DigitalOptions& opts, const Model& model, const Dataset& data,
                       long t, const LearningConfig& cfg, RunStats& stats) {
    const int n = static_cast<int>(devs.size());
    const std::vector<Vec> grads = staged_gradients(devs, model, data, cfg);
    const double eta = cfg.eta(t);

    // Everyone's broadcast payload, decompressed as receivers see it.
    std::vector<Vec> payload(n);
    for (int i = 0; i < n; ++i) {
        if (g.degree(i) == 0) continue;  // nobody to serve, stays silent
        Vec carried = devs[i].theta;
        axpy(1.0, devs[i].error, carried);

        if (opts.lossless) {
            payload[i] = carried;
        } else {
            const long budget = digital_bits(i, g, chan, params, schedule.num_slots);
            const CompressedVector cv = compress(carried, static_cast<double>(budget), opts.quant);
            const double billed = std::ceil(cv.position_bits()) +
                                  static_cast<double>(cv.quant_bits) * cv.support.size();
            if (!cv.support.empty() && billed > static_cast<double>(budget) + 1e-6)
                throw NumericError("digital payload exceeded its bit budget");
            if (cv.support.empty()) ++stats.digital_zero_budget;
            payload[i] = cv.dense();
        }
        update_error(devs[i].error, devs[i].theta, payload[i]);
        ++stats.digital_transmissions;
        ++stats.error_updates;
    }

    std::vector<Vec> next(n);
    for (int i = 0; i < n; ++i) {
        Vec acc = devs[i].theta;
        for (double& x : acc) x *= mix.w(i, i);
        for (int j : g.adj[i]) {
            if (payload[j].empty()) continue;
            axpy(mix.w(i, j), payload[j], acc);
        }
        axpy(-eta, grads[i], acc);
        next[i] = std::move(acc);
    }
    for (int i = 0; i < n; ++i) devs[i].theta = std::move(next[i]);
    ++stats.consensus_rounds;
}

void analog_consensus(std::vector<DeviceState>& devs, const MixingMatrix& mix,
                      const ConnectivityGraph& g, const AnalogSchedule& schedule,
                      const CompressionMatrix* matrix, const BlockChannelState& chan,
                      const ChannelParams& params, const AnalogOptions& opts, const Model& model,
                      const Dataset& data, long t, const LearningConfig& cfg, RunStats& stats) {
    const int n = static_cast<int>(devs.size());
    const int d = model.dim();
    if (!opts.exact_payloads && (matrix == nullptr || matrix->dim != d))
        throw ConfigError("analog consensus needs a compression matrix matching the model");
    const int m = opts.exact_payloads ? d : matrix->m;
    const int k = std::clamp(opts.sparsity_k, 1, d);

    const std::vector<Vec> grads = staged_gradients(devs, model, data, cfg);
    const double eta = cfg.eta(t);

    // Sparsified payloads and their transmitted projections.
    std::vector<SparseVec> sparse(n);
    std::vector<Vec> phi(n);
    Vec phi_sq(n, 0.0);
    std::vector<char> participates(n, 0);
    for (int i = 0; i < n; ++i) {
        if (schedule.tx_count_of[i] + schedule.center_count_of[i] == 0) continue;
        participates[i] = 1;
        Vec carried = devs[i].theta;
        axpy(1.0, devs[i].error, carried);
        sparse[i] = sparsify_top_k(carried, k);
        phi[i] = opts.exact_payloads ? sparse[i].dense() : project(*matrix, sparse[i]);
        phi_sq[i] = squared_norm(phi[i]);
    }

    const PowerScaling scaling =
        compute_power_scaling(schedule, g, chan, phi_sq, params, opts.deep_fade_threshold);
    for (char x : scaling.excluded_edge) stats.deep_fade_exclusions += x;
    const double ratio = audit_power_ratio(schedule, g, chan, phi_sq, scaling, params);
    stats.max_power_ratio = std::max(stats.max_power_ratio, ratio);
    if (ratio > 1.0 + 1e-9) ++stats.power_violations;

    // How many rounds carry each edge: one for star schedules, two for the
    // round-robin baseline (each endpoint hosts the link once). Receptions of
    // the same logical payload are averaged accordingly.
    std::vector<int> occ(g.edge_count(), 0);
    for (const auto& round : schedule.rounds)
        for (const auto& [i, j] : round.active_edges) ++occ[g.edge_index(i, j)];

    const double log_d = std::log(std::max(2, d));
    auto recover = [&](const Vec& y, double sigma) {
        if (opts.exact_payloads) return y;
        double lambda = opts.lambda_scale * sigma * std::sqrt(2.0 * log_d);
        if (!(lambda > 0.0)) {
            const Vec aty = matvec_transposed(matrix->a, y);
            double linf = 0.0;
            for (double v : aty) linf = std::max(linf, std::abs(v));
            lambda = 1e-8 * linf;
        }
        ++stats.recoveries;
        return sparse_recover(y, *matrix, lambda, opts.lasso_iters, opts.lipschitz);
    };

    std::vector<Vec> contribution(n, Vec(d, 0.0));
    for (int r = 0; r < schedule.round_count(); ++r) {
        const AnalogRound& round = schedule.rounds[r];
        std::vector<char> is_center(n, 0);
        for (int c : round.centers) is_center[c] = 1;

        // Gather slot: each center hears the superposition of its surviving
        // transmitters; one recovery yields the whole neighbor sum.
        for (int c : round.centers) {
            std::vector<const Vec*> arriving;
            int edge_occ = 0;
            for (const auto& [i, j] : round.active_edges) {
                if (i != c && j != c) continue;
                const int e = g.edge_index(i, j);
                if (edge_occ == 0) edge_occ = occ[e];
                else if (edge_occ != occ[e])
                    throw ScheduleError("mixed edge multiplicity within one round");
                if (scaling.excluded_edge[e]) continue;
                const int tx = (i == c) ? j : i;
                if (phi_sq[tx] > 0.0) arriving.push_back(&phi[tx]);
            }
            if (edge_occ == 0) continue;  // center with no links this round

            const std::uint64_t nseed = derive_seed(opts.noise_seed, Stream::noise,
                                                    2ULL * static_cast<std::uint64_t>(r),
                                                    static_cast<std::uint64_t>(c));
            const Vec y = aircomp_receive(arriving, m, scaling.gamma, params, nseed, opts.noise_on);
            ++stats.aircomp_receptions;
            const double sigma = opts.noise_on ? std::sqrt(params.n0 / (2.0 * scaling.gamma)) : 0.0;
            const Vec rec = recover(y, sigma);
            axpy(1.0 / edge_occ, rec, contribution[c]);
        }

        // Broadcast slot: each center answers with its own payload; receivers
        // equalize with their local channel estimate.
        for (const auto& [i, j] : round.active_edges) {
            const int c = is_center[i] ? i : j;
            const int rx = (c == i) ? j : i;
            const int e = g.edge_index(i, j);
            if (phi_sq[c] <= 0.0) continue;  // zero payload arrives as zero either way

            const std::uint64_t nseed = derive_seed(opts.noise_seed, Stream::noise,
                                                    2ULL * static_cast<std::uint64_t>(r) + 1,
                                                    static_cast<std::uint64_t>(e));
            const BroadcastResult br = broadcast_receive(
                phi[c], chan.effective_coeff(e), scaling.beta[c],
                opts.deep_fade_threshold * scaling.median_gain, params, nseed, opts.noise_on);
            if (br.erased) {
                ++stats.broadcast_erasures;
                continue;
            }
            ++stats.broadcast_receptions;
            double sigma = 0.0;
            if (opts.noise_on) {
                const double habs = std::abs(chan.effective_coeff(e));
                sigma = std::sqrt(params.n0 / 2.0) / (habs * scaling.beta[c]);
            }
            const Vec rec = recover(br.y, sigma);
            axpy(1.0 / occ[e], rec, contribution[rx]);
        }
    }

    std::vector<Vec> next(n);
    for (int i = 0; i < n; ++i) {
        Vec acc = devs[i].theta;
        for (double& x : acc) x *= mix.w(i, i);
        axpy(mix.alpha, contribution[i], acc);
        axpy(-eta, grads[i], acc);
        next[i] = std::move(acc);
    }
    // One accumulator update per transmitting device per block, against the
    // pre-update parameters.
    for (int i = 0; i < n; ++i) {
        if (!participates[i]) continue;
        update_error(devs[i].error, devs[i].theta, sparse[i].dense());
        ++stats.error_updates;
    }
    for (int i = 0; i < n; ++i) devs[i].theta = std::move(next[i]);
    ++stats.consensus_rounds;
}

double model_accuracy(const Model& model, const Vec& theta, const Dataset& data) {
    if (data.size() == 0) throw ConfigError("model_accuracy: empty dataset");
    const int f_dim = model.feature_dim;
    const int c_dim = model.classes;
    const double* bias = theta.data() + static_cast<std::size_t>(c_dim) * f_dim;
    int correct = 0;
    for (int s = 0; s < data.size(); ++s) {
        const double* x = data.sample(s);
        int best = 0;
        double best_z = -1e300;
        for (int c = 0; c < c_dim; ++c) {
            const double* w = theta.data() + static_cast<std::size_t>(c) * f_dim;
            double z = bias[c];
            for (int f = 0; f < f_dim; ++f) z += w[f] * x[f];
            if (z > best_z) {
                best_z = z;
                best = c;
            }
        }
        if (best == data.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / data.size();
}

}  // namespace d2dsgd
