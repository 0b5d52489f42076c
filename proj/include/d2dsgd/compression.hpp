#pragma once

#include <vector>

#include "d2dsgd/linalg.hpp"

namespace d2dsgd {

// log2 of the binomial coefficient via lgamma; exact enough for bit budgets.
double log2_binomial(int n, int k);

// Indices of the l largest-magnitude entries, ascending. Magnitude ties go to
// the lower index so selection is deterministic.
std::vector<int> top_select(const Vec& v, int l);

struct QuantConfig {
    int bits = 16;               // quantizer resolution per kept value
    bool charge_header = false;  // also bill the 64-bit (min, max) range header
};

// Sparse quantized message: kept positions, their dequantized values and the
// value range used by the uniform quantizer.
struct CompressedVector {
    int dim = 0;
    std::vector<int> support;  // ascending
    Vec values;                // dequantized, aligned with support
    double lo = 0.0;
    double hi = 0.0;
    int quant_bits = 0;

    Vec dense() const;
    double position_bits() const;  // log2 C(dim, |support|)
    double payload_bits(bool charge_header) const;
};

// Largest sparsity level l with log2 C(d, l) + bits_per_value * l <= budget.
// The cost is not monotone in l, so candidates are scanned from d down.
int max_sparsity_level(double budget_bits, int dim, int bits_per_value);

// Top-l selection followed by b-bit uniform quantization over the kept
// values' range, with midpoint reconstruction. l is the largest level that
// fits the bit budget; a budget too small for a single value yields an empty
// message.
CompressedVector compress(const Vec& v, double budget_bits, const QuantConfig& q);

// Error feedback memory: e += theta - sent. The compression error is replayed
// into the next message instead of being dropped.
void update_error(Vec& error, const Vec& theta, const Vec& sent);

}  // namespace d2dsgd
