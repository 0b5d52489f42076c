#include "doctest.h"

#include "d2dsgd/aircomp.hpp"
#include "d2dsgd/errors.hpp"
#include "d2dsgd/rng.hpp"

#include <cmath>
#include <complex>

using namespace d2dsgd;

namespace {

// Two nodes, one edge: node 0 gathers, node 1 transmits, node 0 broadcasts.
struct PairLink {
    ConnectivityGraph g = make_graph(2, {{0, 1}}, {1.0});
    AnalogSchedule sched = make_analog_schedule(g);
    BlockChannelState chan;
    ChannelParams params;

    PairLink(double gain, double pbar, long n_uses) {
        chan.block = 1;
        chan.h = {std::complex<double>(std::sqrt(gain), 0.0)};
        chan.path_gain = {1.0};
        params.pbar = pbar;
        params.n0 = 1.0;
        params.n_uses = n_uses;
    }
};

}  // namespace

TEST_SUITE("aircomp") {

TEST_CASE("projection matrix shape, determinism and scaling") {
    auto a = build_compression_matrix(7, 32, 64);
    CHECK(a.m == 32);
    CHECK(a.dim == 64);
    auto b = build_compression_matrix(7, 32, 64);
    CHECK(a.a.a == b.a.a);
    auto c = build_compression_matrix(8, 32, 64);
    CHECK(a.a.a != c.a.a);
    double sum = 0, sumsq = 0;
    for (double x : a.a.a) {
        sum += x;
        sumsq += x * x;
    }
    const int n = 32 * 64;
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sumsq / n == doctest::Approx(1.0 / 32).epsilon(0.08));
}

TEST_CASE("projection requires fewer rows than the dimension") {
    CHECK_THROWS_AS(build_compression_matrix(1, 64, 64), ConfigError);
    CHECK_THROWS_AS(build_compression_matrix(1, 65, 64), ConfigError);
    CHECK_THROWS_AS(build_compression_matrix(1, 0, 64), ConfigError);
}

TEST_CASE("default sparsity follows the device-count rule") {
    CHECK(default_sparsity(7850, 8) == 849);
    CHECK(default_sparsity(210, 8) == 22);
    CHECK(default_sparsity(784, 8) == 84);
    CHECK(default_sparsity(100, 1) == 60);
}

TEST_CASE("top-k sparsification keeps magnitudes and dense round trips") {
    Vec v{0.0, -4.0, 1.0, 3.0};
    auto s = sparsify_top_k(v, 2);
    CHECK(s.idx == std::vector<int>{1, 3});
    CHECK(s.val[0] == doctest::Approx(-4.0));
    CHECK(s.val[1] == doctest::Approx(3.0));
    CHECK(s.squared_norm() == doctest::Approx(25.0));
    Vec d = s.dense();
    CHECK(d == Vec{0.0, -4.0, 0.0, 3.0});
}

TEST_CASE("sparse projection equals the dense product") {
    auto a = build_compression_matrix(3, 8, 16);
    Rng r(4);
    Vec v(16, 0.0);
    for (int i : {1, 5, 11}) v[static_cast<size_t>(i)] = r.normal();
    auto s = sparsify_top_k(v, 3);
    Vec via_sparse = project(a, s);
    Vec via_dense = matvec(a.a, v);
    REQUIRE(via_sparse.size() == 8);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(via_sparse[i] == doctest::Approx(via_dense[i]).epsilon(1e-12));
    }
}

TEST_CASE("power scaling on a single link matches hand arithmetic") {
    PairLink pl(0.25, 1.0, 100);
    Vec phi_sq{9.0, 4.0};  // node 0 broadcast energy, node 1 gather energy
    auto ps = compute_power_scaling(pl.sched, pl.g, pl.chan, phi_sq, pl.params, 1e-2);
    // gamma = pbar*N * 1/(1+0) / (phi_1^2 / g) = 100 * 0.25 / 4
    CHECK(ps.gamma == doctest::Approx(6.25).epsilon(1e-12));
    // beta_0 = sqrt(pbar*N / ((0+1) * phi_0^2)) = sqrt(100/9)
    CHECK(ps.beta[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(ps.excluded_edge[0] == 0);
    const double ratio =
        audit_power_ratio(pl.sched, pl.g, pl.chan, phi_sq, ps, pl.params);
    CHECK(ratio <= 1.0 + 1e-9);
}

TEST_CASE("audited energy never exceeds the budget across random blocks") {
    ChannelParams params;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto g = generate_star_extended(seed, 8, 0.3);
        auto sched = make_analog_schedule(g);
        Rng r(seed * 17 + 1);
        for (long block = 1; block <= 10; ++block) {
            auto chan = sample_block_fading(seed, block, g, params);
            Vec phi_sq(8);
            for (auto& x : phi_sq) x = 1.0 + 10.0 * r.uniform();
            auto ps = compute_power_scaling(sched, g, chan, phi_sq, params, 1e-2);
            CHECK(audit_power_ratio(sched, g, chan, phi_sq, ps, params) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("a faded link is excluded and stops throttling the scale") {
    auto g = make_graph(3, {{0, 1}, {0, 2}}, {1.0, 1.0});
    auto sched = make_analog_schedule(g);
    REQUIRE(sched.rounds[0].centers == std::vector<int>{0});
    ChannelParams params;
    params.pbar = 1.0;
    params.n0 = 1.0;
    params.n_uses = 100;
    BlockChannelState chan;
    chan.block = 1;
    chan.h = {std::complex<double>(1.0, 0.0), std::complex<double>(1e-6, 0.0)};
    chan.path_gain = {1.0, 1.0};
    Vec phi_sq{1.0, 4.0, 4.0};
    auto ps = compute_power_scaling(sched, g, chan, phi_sq, params, 1e-2);
    CHECK(ps.excluded_edge[0] == 0);
    CHECK(ps.excluded_edge[1] == 1);
    // Only the healthy link constrains gamma: 100 * 1 / 4.
    CHECK(ps.gamma == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("gather superposition is the exact sum without noise") {
    Vec a{1.0, 2.0}, b{0.5, -1.0};
    auto y = aircomp_receive({&a, &b}, 2, 4.0, ChannelParams{}, 99, false);
    CHECK(y[0] == doctest::Approx(1.5));
    CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("gather noise shrinks as the power scale grows") {
    ChannelParams params;
    params.n0 = 1.0;
    Vec zero(2000, 0.0);
    for (double gamma : {1.0, 100.0}) {
        auto y = aircomp_receive({&zero}, 2000, gamma, params, 5, true);
        double power = 0;
        for (double x : y) power += x * x;
        // Re{n}/sqrt(gamma) has variance n0/(2*gamma) per coordinate.
        CHECK(power / 2000 == doctest::Approx(0.5 / gamma).epsilon(0.1));
    }
}

TEST_CASE("gather noise is reproducible by seed") {
    ChannelParams params;
    Vec a{1.0, 2.0, 3.0};
    auto y1 = aircomp_receive({&a}, 3, 2.0, params, 42, true);
    auto y2 = aircomp_receive({&a}, 3, 2.0, params, 42, true);
    CHECK(y1 == y2);
    auto y3 = aircomp_receive({&a}, 3, 2.0, params, 43, true);
    CHECK(y1 != y3);
}

TEST_CASE("broadcast equalization undoes the channel without noise") {
    ChannelParams params;
    Vec payload{2.0, -3.0, 0.5};
    std::complex<double> h(0.6, -0.8);
    auto out = broadcast_receive(payload, h, 2.5, 1e-9, params, 7, false);
    REQUIRE_FALSE(out.erased);
    for (size_t i = 0; i < 3; ++i) CHECK(out.y[i] == doctest::Approx(payload[i]).epsilon(1e-12));
}

TEST_CASE("broadcast below the fade floor is erased") {
    ChannelParams params;
    Vec payload{1.0, 1.0};
    auto out = broadcast_receive(payload, std::complex<double>(1e-8, 0.0), 2.0, 1e-2, params, 7,
                                 true);
    CHECK(out.erased);
    for (double x : out.y) CHECK(x == 0.0);
    auto out2 = broadcast_receive(payload, std::complex<double>(1.0, 0.0), 0.0, 1e-9, params, 7,
                                  true);
    CHECK(out2.erased);
}

TEST_CASE("planted sparse vectors are recovered to numerical accuracy") {
    int good = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        auto a = build_compression_matrix(trial + 100, 32, 64);
        Rng r(trial * 31 + 5);
        SparseVec x;
        x.dim = 64;
        for (int i = 0; i < 5; ++i) {
            int idx;
            do {
                idx = static_cast<int>(r.uniform_int(64));
            } while (std::find(x.idx.begin(), x.idx.end(), idx) != x.idx.end());
            x.idx.push_back(idx);
        }
        std::sort(x.idx.begin(), x.idx.end());
        for (int i = 0; i < 5; ++i) x.val.push_back(r.normal() + (r.uniform() < 0.5 ? -2.0 : 2.0));
        Vec y = project(a, x);
        Vec rec = sparse_recover(y, a, 0.0, 200);
        Vec truth = x.dense();
        double err = 0, ref = 0;
        for (size_t i = 0; i < 64; ++i) {
            err += (rec[i] - truth[i]) * (rec[i] - truth[i]);
            ref += truth[i] * truth[i];
        }
        if (std::sqrt(err / ref) <= 1e-3) ++good;
    }
    CHECK(good >= 18);
}

TEST_CASE("recovery tolerates mild noise") {
    auto a = build_compression_matrix(12, 48, 96);
    Rng r(88);
    SparseVec x;
    x.dim = 96;
    x.idx = {3, 20, 50, 90};
    for (int i = 0; i < 4; ++i) x.val.push_back(3.0 + r.uniform());
    Vec y = project(a, x);
    for (auto& v : y) v += 0.01 * r.normal();
    const double sigma = 0.01;
    const double lambda = sigma * std::sqrt(2.0 * std::log(96.0));
    Vec rec = sparse_recover(y, a, lambda, 300);
    Vec truth = x.dense();
    double err = 0, ref = 0;
    for (size_t i = 0; i < 96; ++i) {
        err += (rec[i] - truth[i]) * (rec[i] - truth[i]);
        ref += truth[i] * truth[i];
    }
    CHECK(std::sqrt(err / ref) < 0.05);
}

TEST_CASE("explicit lipschitz constant gives the same answer") {
    auto a = build_compression_matrix(19, 24, 48);
    SparseVec x;
    x.dim = 48;
    x.idx = {5, 17};
    x.val = {1.5, -2.5};
    Vec y = project(a, x);
    const double lip = largest_eigenvalue_ata(a.a) * 1.001;
    Vec r1 = sparse_recover(y, a, 0.0, 200);
    Vec r2 = sparse_recover(y, a, 0.0, 200, lip);
    for (size_t i = 0; i < 48; ++i) CHECK(r1[i] == doctest::Approx(r2[i]).epsilon(1e-9));
}

}
