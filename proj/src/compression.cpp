#include "d2dsgd/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "d2dsgd/errors.hpp"

namespace d2dsgd {

double log2_binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) throw ConfigError("log2_binomial: need 0 <= k <= n");
    if (k == 0 || k == n) return 0.0;
    constexpr double inv_ln2 = 1.4426950408889634;
    return (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * inv_ln2;
}

std::vector<int> top_select(const Vec& v, int l) {
    const int d = static_cast<int>(v.size());
    if (l < 0 || l > d) throw ConfigError("top_select: level out of range");
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    auto bigger = [&](int a, int b) {
        const double ma = std::abs(v[a]);
        const double mb = std::abs(v[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::nth_element(idx.begin(), idx.begin() + std::min(l, d), idx.end(), bigger);
    idx.resize(l);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Vec CompressedVector::dense() const {
    Vec out(dim, 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) out[support[k]] = values[k];
    return out;
}

double CompressedVector::position_bits() const {
    return log2_binomial(dim, static_cast<int>(support.size()));
}

double CompressedVector::payload_bits(bool charge_header) const {
    double bits = position_bits() + static_cast<double>(quant_bits) * support.size();
    if (charge_header && !support.empty()) bits += 64.0;
    return bits;
}

int max_sparsity_level(double budget_bits, int dim, int bits_per_value) {
    if (dim < 1) throw ConfigError("max_sparsity_level: dimension must be positive");
    if (bits_per_value < 1) throw ConfigError("max_sparsity_level: need at least one bit per value");
    if (!(budget_bits >= 0.0)) return 0;
    for (int l = dim; l >= 1; --l) {
        const double cost = log2_binomial(dim, l) + static_cast<double>(bits_per_value) * l;
        if (cost <= budget_bits) return l;
    }
    return 0;
}

CompressedVector compress(const Vec& v, double budget_bits, const QuantConfig& q) {
    const int d = static_cast<int>(v.size());
    if (d == 0) throw ConfigError("compress: empty vector");
    if (q.bits < 1 || q.bits > 32) throw ConfigError("compress: quantizer bits must be in [1, 32]");
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError("compress: input has non-finite entries");

    double budget = budget_bits;
    if (q.charge_header) budget -= 64.0;

    CompressedVector out;
    out.dim = d;
    out.quant_bits = q.bits;
    const int l = budget >= 0.0 ? max_sparsity_level(budget, d, q.bits) : 0;
    if (l == 0) return out;

    out.support = top_select(v, l);
    double lo = v[out.support[0]];
    double hi = lo;
    for (int i : out.support) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    out.lo = lo;
    out.hi = hi;

    out.values.resize(out.support.size());
    if (hi == lo) {
        std::fill(out.values.begin(), out.values.end(), lo);
        return out;
    }
    const double levels = std::ldexp(1.0, q.bits);  // 2^bits
    const double step = (hi - lo) / levels;
    for (std::size_t k = 0; k < out.support.size(); ++k) {
        double code = std::floor((v[out.support[k]] - lo) / step);
        code = std::clamp(code, 0.0, levels - 1.0);
        out.values[k] = lo + (code + 0.5) * step;
    }
    return out;
}

void update_error(Vec& error, const Vec& theta, const Vec& sent) {
    if (error.size() != theta.size() || theta.size() != sent.size())
        throw NumericError("update_error: dimension mismatch");
    for (std::size_t i = 0; i < error.size(); ++i) error[i] += theta[i] - sent[i];
}

}  // namespace d2dsgd
