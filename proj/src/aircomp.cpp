#include "d2dsgd/aircomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "d2dsgd/compression.hpp"
#include "d2dsgd/errors.hpp"
#include "d2dsgd/rng.hpp"

namespace d2dsgd {

CompressionMatrix build_compression_matrix(std::uint64_t session_seed, int m, int dim) {
    if (m < 1) throw ConfigError("compression matrix needs at least one row");
    if (m >= dim) throw ConfigError("compression is pointless when m >= d; use the exact path");

    CompressionMatrix cm;
    cm.m = m;
    cm.dim = dim;
    cm.a = Mat(m, dim);
    Rng rng(derive_seed(session_seed, Stream::matrix));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (double& x : cm.a.a) x = scale * rng.normal();
    return cm;
}

int default_sparsity(int dim, int num_devices) {
    if (dim < 1 || num_devices < 1) throw ConfigError("default_sparsity: bad arguments");
    return static_cast<int>(std::floor(dim * (1.0 - std::pow(0.4, 1.0 / num_devices))));
}

Vec SparseVec::dense() const {
    Vec out(dim, 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = val[k];
    return out;
}

double SparseVec::squared_norm() const {
    double s = 0.0;
    for (double x : val) s += x * x;
    return s;
}

SparseVec sparsify_top_k(const Vec& v, int k) {
    SparseVec s;
    s.dim = static_cast<int>(v.size());
    s.idx = top_select(v, std::min<int>(k, s.dim));
    s.val.reserve(s.idx.size());
    for (int i : s.idx) s.val.push_back(v[i]);
    return s;
}

Vec project(const CompressionMatrix& a, const SparseVec& s) {
    if (s.dim != a.dim) throw NumericError("project: dimension mismatch");
    Vec out(a.m, 0.0);
    for (std::size_t k = 0; k < s.idx.size(); ++k) {
        const int col = s.idx[k];
        const double x = s.val[k];
        for (int r = 0; r < a.m; ++r) out[r] += a.a(r, col) * x;
    }
    return out;
}

PowerScaling compute_power_scaling(const AnalogSchedule& schedule, const ConnectivityGraph& g,
                                   const BlockChannelState& channels, const Vec& phi_sq,
                                   const ChannelParams& params, double deep_fade_threshold) {
    params.validate();
    if (static_cast<int>(phi_sq.size()) != g.node_count)
        throw NumericError("compute_power_scaling: payload norms must cover every device");
    if (!(deep_fade_threshold >= 0.0)) throw ConfigError("deep fade threshold must be non-negative");

    PowerScaling ps;
    ps.beta.assign(g.node_count, 0.0);
    ps.excluded_edge.assign(g.edge_count(), 0);

    if (g.edge_count() > 0) {
        Vec gains(g.edge_count());
        for (int e = 0; e < g.edge_count(); ++e) gains[e] = channels.effective_gain(e);
        Vec sorted = gains;
        std::sort(sorted.begin(), sorted.end());
        const int n = g.edge_count();
        ps.median_gain = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        for (int e = 0; e < n; ++e)
            if (gains[e] < deep_fade_threshold * ps.median_gain) ps.excluded_edge[e] = 1;
    }

    // Inverse-gain load of each device's surviving gather links.
    Vec inv_gain(g.node_count, 0.0);
    for (const auto& round : schedule.rounds) {
        std::vector<char> is_center(g.node_count, 0);
        for (int c : round.centers) is_center[c] = 1;
        for (const auto& [i, j] : round.active_edges) {
            const int e = g.edge_index(i, j);
            if (e < 0) throw ScheduleError("scheduled edge missing from graph");
            if (ps.excluded_edge[e]) continue;
            const int tx = is_center[i] ? j : i;
            inv_gain[tx] += 1.0 / channels.effective_gain(e);
        }
    }

    const double energy = params.pbar * static_cast<double>(params.n_uses);
    double gamma = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.node_count; ++j) {
        const int nc = schedule.tx_count_of[j];
        const int nb = schedule.center_count_of[j];
        if (nc >= 1 && phi_sq[j] > 0.0 && inv_gain[j] > 0.0) {
            const double share = static_cast<double>(nc) / (nc + nb);
            gamma = std::min(gamma, energy * share / (phi_sq[j] * inv_gain[j]));
        }
        if (nb >= 1 && phi_sq[j] > 0.0)
            ps.beta[j] = std::sqrt(energy / ((nc + nb) * phi_sq[j]));
    }
    ps.gamma = std::isfinite(gamma) ? gamma : 1.0;
    if (!(ps.gamma > 0.0)) throw NumericError("power scaling collapsed to zero");
    return ps;
}

double audit_power_ratio(const AnalogSchedule& schedule, const ConnectivityGraph& g,
                         const BlockChannelState& channels, const Vec& phi_sq,
                         const PowerScaling& scaling, const ChannelParams& params) {
    Vec energy(g.node_count, 0.0);
    for (const auto& round : schedule.rounds) {
        std::vector<char> is_center(g.node_count, 0);
        for (int c : round.centers) is_center[c] = 1;
        for (const auto& [i, j] : round.active_edges) {
            const int e = g.edge_index(i, j);
            if (scaling.excluded_edge[e]) continue;
            const int tx = is_center[i] ? j : i;
            energy[tx] += scaling.gamma * phi_sq[tx] / channels.effective_gain(e);
        }
        for (int c : round.centers)
            if (!round.active_edges.empty())
                energy[c] += scaling.beta[c] * scaling.beta[c] * phi_sq[c];
    }
    const double budget = params.pbar * static_cast<double>(params.n_uses);
    double worst = 0.0;
    for (double e : energy) worst = std::max(worst, e / budget);
    return worst;
}

Vec aircomp_receive(const std::vector<const Vec*>& payloads, int m, double gamma,
                    const ChannelParams& params, std::uint64_t noise_seed, bool noise_on) {
    if (!(gamma > 0.0)) throw NumericError("aircomp_receive: gamma must be positive");
    Vec out(m, 0.0);
    for (const Vec* p : payloads) {
        if (static_cast<int>(p->size()) != m) throw NumericError("aircomp_receive: payload length mismatch");
        for (int c = 0; c < m; ++c) out[c] += (*p)[c];
    }
    if (noise_on) {
        Rng rng(noise_seed);
        const double s = std::sqrt(params.n0) / std::sqrt(gamma);
        for (int c = 0; c < m; ++c) out[c] += s * rng.cnormal().real();
    }
    return out;
}

BroadcastResult broadcast_receive(const Vec& payload, std::complex<double> h_eff, double beta,
                                  double min_gain, const ChannelParams& params,
                                  std::uint64_t noise_seed, bool noise_on) {
    BroadcastResult r;
    if (std::norm(h_eff) < min_gain || !(beta > 0.0)) {
        r.y.assign(payload.size(), 0.0);
        r.erased = true;
        return r;
    }
    r.y = payload;
    if (noise_on) {
        Rng rng(noise_seed);
        const double s = std::sqrt(params.n0);
        for (double& y : r.y) {
            const std::complex<double> n = s * rng.cnormal();
            y += (n / h_eff).real() / beta;
        }
    }
    return r;
}

namespace {

void soft_threshold(Vec& x, double t) {
    for (double& v : x) {
        if (v > t) v -= t;
        else if (v < -t) v += t;
        else v = 0.0;
    }
}

}  // namespace

Vec sparse_recover(const Vec& y, const CompressionMatrix& a, double lambda, int iters,
                   double lipschitz) {
    if (lambda < 0.0) throw ConfigError("sparse_recover: lambda must be non-negative");
    if (iters < 1) throw ConfigError("sparse_recover: need at least one iteration");
    if (static_cast<int>(y.size()) != a.m) throw NumericError("sparse_recover: length mismatch");
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
        throw NumericError("sparse_recover: power iteration failed to produce a step size");

    const double step = 1.0 / lipschitz;

    double corr_scale = 0.0;
    {
        Vec corr = matvec_transposed(a.a, y);
        for (double c : corr) corr_scale = std::max(corr_scale, std::abs(c));
    }

    // Cold-started soft-thresholding stalls when the requested lambda sits far
    // below the correlation scale, so walk the threshold down geometrically and
    // warm-start each leg. lambda is floored at a tiny multiple of the
    // correlation scale; below that the objective cannot sparsify anyway. At
    // each leg's optimum the off-support correlations obey |a_j'r| <= lambda,
    // so those coordinates settle on exact zeros and the debias step below
    // sees the true support.
    const double lam_final = std::max(lambda, 1e-6 * corr_scale);
    std::vector<double> legs;
    for (double lam = 0.1 * corr_scale; lam > 4.0 * lam_final; lam *= 0.25) legs.push_back(lam);
    legs.push_back(lam_final);

    Vec x(a.dim, 0.0);
    for (size_t leg = 0; leg < legs.size(); ++leg) {
        const double lam = legs[leg];
        const int n_it = (leg + 1 == legs.size()) ? iters : std::max(10, iters / 5);
        Vec z = x;
        double t = 1.0;
        for (int it = 0; it < n_it; ++it) {
            Vec r = matvec(a.a, z);
            for (int c = 0; c < a.m; ++c) r[c] -= y[c];
            Vec grad = matvec_transposed(a.a, r);
            Vec x_next = z;
            axpy(-step, grad, x_next);
            soft_threshold(x_next, lam * step);

            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            double delta = 0.0, scale = 0.0;
            for (int c = 0; c < a.dim; ++c) {
                const double d = x_next[c] - x[c];
                delta += d * d;
                scale += x_next[c] * x_next[c];
                z[c] = x_next[c] + ((t - 1.0) / t_next) * d;
            }
            x = std::move(x_next);
            t = t_next;
            if (delta <= 1e-24 * std::max(1.0, scale)) break;
        }
    }

    // Least-squares refit on the recovered support removes the shrinkage bias.
    std::vector<int> support;
    for (int c = 0; c < a.dim; ++c)
        if (x[c] != 0.0) support.push_back(c);
    const int s = static_cast<int>(support.size());
    if (s >= 1 && s <= std::min(a.m, 4096)) {
        Mat gram(s, s);
        Vec rhs(s, 0.0);
        for (int p = 0; p < s; ++p) {
            for (int q = p; q < s; ++q) {
                double acc = 0.0;
                for (int r = 0; r < a.m; ++r)
                    acc += a.a(r, support[p]) * a.a(r, support[q]);
                gram(p, q) = acc;
                gram(q, p) = acc;
            }
            double acc = 0.0;
            for (int r = 0; r < a.m; ++r) acc += a.a(r, support[p]) * y[r];
            rhs[p] = acc;
        }
        for (int p = 0; p < s; ++p) gram(p, p) += 1e-10 * (1.0 + gram(p, p));
        Vec w;
        if (solve_spd(gram, rhs, w)) {
            bool ok = true;
            for (double v : w)
                if (!std::isfinite(v)) ok = false;
            if (ok)
                for (int p = 0; p < s; ++p) x[support[p]] = w[p];
        }
    }
    return x;
}

Vec sparse_recover(const Vec& y, const CompressionMatrix& a, double lambda, int iters) {
    const double l = largest_eigenvalue_ata(a.a);
    if (!(l > 0.0) || !std::isfinite(l))
        throw NumericError("sparse_recover: power iteration did not converge");
    return sparse_recover(y, a, lambda, iters, l * 1.001);
}

}  // namespace d2dsgd
