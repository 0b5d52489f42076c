#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace d2dsgd {

// splitmix64 finalizer. Used only for deriving substream seeds, never as the
// generator itself.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent randomness source of a run. Every consumer derives its own
// substream so that adding draws in one place never shifts another.
enum class Stream : std::uint64_t {
    topology = 1,
    blockage = 2,
    partition = 3,
    init = 4,
    fading = 5,
    noise = 6,
    matrix = 7,
    batch = 8,
    synth = 9,
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(seed ^ (0x5851f42d4c957f2dULL * (stream + 1)));
    s = splitmix64(s ^ (0xda942042e4dd58b5ULL * (a + 1)));
    return splitmix64(s ^ (0xd1342543de82ef95ULL * (b + 1)));
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream), a, b);
}

// mt19937_64 with hand-rolled output conversions. The standard library does
// not pin down distribution algorithms, so uniform/normal are implemented
// here to keep sequences identical across platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; never returns zero, safe for logs.
    double uniform_pos() { return 1.0 - uniform(); }

    // Uniform on (lo, hi].
    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform_pos(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal, unit variance (CN(0,1)).
    std::complex<double> cnormal() {
        const double s = 1.0 / std::sqrt(2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace d2dsgd
