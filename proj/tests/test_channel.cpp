#include "doctest.h"

#include "d2dsgd/channel.hpp"
#include "d2dsgd/errors.hpp"

#include <cmath>
#include <complex>

using namespace d2dsgd;

TEST_SUITE("channel") {

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CHECK(dbm_to_watts(-169.0) == doctest::Approx(1.2589254117941663e-20).epsilon(1e-12));
    CHECK(db_to_linear(-33.5) == doctest::Approx(std::pow(10.0, -3.35)).epsilon(1e-12));
    CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
}

TEST_CASE("defaults describe the reference link budget") {
    ChannelParams p;
    p.validate();
    CHECK(p.a0 == doctest::Approx(std::pow(10.0, -3.35)));
    CHECK(p.pathloss_exp == doctest::Approx(3.76));
    CHECK(p.pbar == doctest::Approx(1e-3));
    CHECK(p.n_uses == 30000);
}

TEST_CASE("invalid channel parameters are rejected") {
    ChannelParams p;
    p.pbar = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChannelParams{};
    p.n_uses = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChannelParams{};
    p.n0 = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("path gain follows the distance law") {
    ChannelParams p;
    auto g = make_graph(3, {{0, 1}, {1, 2}}, {1.0, 10.0});
    auto st = sample_block_fading(5, 1, g, p);
    REQUIRE(st.path_gain.size() == 2);
    CHECK(st.path_gain[0] == doctest::Approx(p.a0).epsilon(1e-12));
    CHECK(st.path_gain[1] == doctest::Approx(p.a0 * std::pow(10.0, -3.76)).epsilon(1e-9));
    CHECK(st.effective_gain(0) == doctest::Approx(st.path_gain[0] * std::norm(st.h[0])));
}

TEST_CASE("fading is reproducible per block and fresh across blocks") {
    ChannelParams p;
    auto g = make_graph(4, {{0, 1}, {0, 2}, {0, 3}}, {30.0, 40.0, 50.0});
    auto a = sample_block_fading(5, 3, g, p);
    auto b = sample_block_fading(5, 3, g, p);
    CHECK(a.h == b.h);
    auto c = sample_block_fading(5, 4, g, p);
    CHECK(a.h != c.h);
    auto d = sample_block_fading(6, 3, g, p);
    CHECK(a.h != d.h);
}

TEST_CASE("rayleigh fading has unit average power") {
    ChannelParams p;
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < 200; ++i) edges.push_back({0, i});
    auto g = make_graph(200, edges, std::vector<double>(edges.size(), 50.0));
    double power = 0;
    int n = 0;
    for (long blk = 1; blk <= 50; ++blk) {
        auto st = sample_block_fading(8, blk, g, p);
        for (auto& h : st.h) {
            power += std::norm(h);
            ++n;
        }
    }
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("bit budget matches a hand-computed case") {
    ChannelParams p;
    p.pbar = 1.0;
    p.n0 = 1.0;
    p.n_uses = 100;
    auto g = make_graph(2, {{0, 1}}, {1.0});
    BlockChannelState st;
    st.block = 1;
    st.h = {std::complex<double>(1.0, 0.0)};
    st.path_gain = {1.0};
    // floor(floor(100/2) * log2(1 + 1*2/1 * 1)) = floor(50 * log2 3) = 79.
    CHECK(digital_bits(0, g, st, p, 2) == 79);
    CHECK(digital_bits(1, g, st, p, 2) == 79);
}

TEST_CASE("bit budget takes the worst neighbor link") {
    ChannelParams p;
    p.pbar = 1.0;
    p.n0 = 1.0;
    p.n_uses = 90;
    auto g = make_graph(3, {{0, 1}, {0, 2}}, {1.0, 1.0});
    BlockChannelState st;
    st.block = 1;
    st.h = {std::complex<double>(1.0, 0.0), std::complex<double>(2.0, 0.0)};
    st.path_gain = {1.0, 1.0};
    // node 0: min gain 1 -> floor(30 * log2(1 + 3)) = 60
    // node 2: only link has gain 4 -> floor(30 * log2 13) = 111
    CHECK(digital_bits(0, g, st, p, 3) == 60);
    CHECK(digital_bits(2, g, st, p, 3) == 111);
}

TEST_CASE("isolated devices have no bit budget to compute") {
    ChannelParams p;
    auto g = make_graph(3, {{0, 1}}, {25.0});
    auto st = sample_block_fading(2, 1, g, p);
    CHECK_THROWS_AS(digital_bits(2, g, st, p, 3), ScheduleError);
    CHECK_THROWS_AS(digital_bits(0, g, st, p, 0), ScheduleError);
}

TEST_CASE("bottleneck snr probe sits in the expected band") {
    ChannelParams p;
    double snr = measure_bottleneck_snr_db(3, 20, 1, 8, 0.1, 20.0, 200.0, p);
    CHECK(snr > 30.0);
    CHECK(snr < 50.0);
}

}
