#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "itosim/error.hpp"
#include "itosim/wiener.hpp"

using namespace itosim;

TEST_CASE("time grid nodes and validation") {
    const TimeGrid g(0.5, 1.5, 4);
    CHECK(g.delta() == 0.25);
    CHECK(g.node(0) == 0.5);
    CHECK(g.node(4) == 1.5);
    CHECK(g.refined(3).steps() == 12);
    CHECK(g.coarsened(2).steps() == 2);
    CHECK_THROWS_AS(g.coarsened(3), GridMismatchError);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), ConfigError);
    CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 4), ConfigError);
}

TEST_CASE("generation is deterministic") {
    const SeedPath s{99, 7, 0, 0, 0};
    const TimeGrid g(0.0, 1.0, 4);
    CHECK(generate_segment(s, 2, g) == generate_segment(s, 2, g));
    SeedPath other = s;
    other.replicate = 8;
    CHECK_FALSE(generate_segment(other, 2, g) == generate_segment(s, 2, g));
}

TEST_CASE("generated increments have mean 0 and variance delta") {
    const TimeGrid g(0.0, 1000.0, 100000);
    const WienerSegment seg = generate_segment(SeedPath{1, 0, 0, 0, 0}, 1, g);
    double sum = 0.0, sq = 0.0;
    for (double x : seg.channel(0)) {
        sum += x;
        sq += x * x;
    }
    const double n = 100000.0;
    const double mean = sum / n;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(0.01 / n));
    CHECK((sq / n - mean * mean) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("channels are independent streams") {
    const TimeGrid g(0.0, 1.0, 50000);
    const WienerSegment seg = generate_segment(SeedPath{3, 0, 0, 0, 0}, 2, g);
    double cross = 0.0;
    for (std::size_t n = 0; n < g.steps(); ++n) cross += seg.increment(0, n) * seg.increment(1, n);
    const double corr = cross / (static_cast<double>(g.steps()) * g.delta());
    CHECK(std::abs(corr) < 4.0 / std::sqrt(50000.0));
}

TEST_CASE("coarsen sums blocks") {
    const WienerSegment seg(TimeGrid(0.0, 1.0, 4), 1, {0.1, 0.3, -0.2, 0.5});
    const WienerSegment c = coarsen(seg, 2);
    CHECK(c.steps() == 2);
    CHECK(c.increment(0, 0) == 0.1 + 0.3);
    CHECK(c.increment(0, 1) == -0.2 + 0.5);
    CHECK(c.increment(0, 0) == doctest::Approx(0.4));
    CHECK(c.increment(0, 1) == doctest::Approx(0.3));
    CHECK_THROWS_AS(coarsen(seg, 3), GridMismatchError);
}

TEST_CASE("coarsen is associative and preserves W_T") {
    const WienerSegment seg = generate_segment(SeedPath{4, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 64));
    const WienerSegment twice = coarsen(coarsen(seg, 4), 4);
    const WienerSegment once = coarsen(seg, 16);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t n = 0; n < 4; ++n) CHECK(twice.increment(c, n) == doctest::Approx(once.increment(c, n)).epsilon(1e-13));
        CHECK(coarsen(seg, 64).total(c) == doctest::Approx(seg.total(c)).epsilon(1e-13));
    }
}

TEST_CASE("cumulative values telescope to the increments") {
    const WienerSegment seg = generate_segment(SeedPath{5, 0, 0, 0, 0}, 1, TimeGrid(0.0, 1.0, 16));
    const std::vector<double> w = seg.cumulative(0);
    REQUIRE(w.size() == 17);
    CHECK(w[0] == 0.0);
    double running = 0.0;
    for (std::size_t n = 0; n < 16; ++n) {
        running += seg.increment(0, n);
        CHECK(w[n + 1] == running);
    }
    CHECK(seg.total(0) == w[16]);
}

TEST_CASE("bridge refinement") {
    const WienerSegment seg = generate_segment(SeedPath{6, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 8));
    const SeedPath seeds{6, 0, 0, 1, 0};

    SUBCASE("factor one is the identity") { CHECK(refine_bridge(seg, 1, seeds) == seg); }

    SUBCASE("refined blocks sum back to the parent") {
        const WienerSegment fine = refine_bridge(seg, 5, seeds);
        CHECK(fine.steps() == 40);
        const WienerSegment back = coarsen(fine, 5);
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t n = 0; n < 8; ++n) CHECK(std::abs(back.increment(c, n) - seg.increment(c, n)) <= 1e-12);
    }

    SUBCASE("deterministic given seeds") { CHECK(refine_bridge(seg, 4, seeds) == refine_bridge(seg, 4, seeds)); }
}

TEST_CASE("bridge split of a single increment") {
    NormalStream rng(SeedPath{7, 0, 0, 0, 0});
    std::vector<double> out(3);
    bridge_split(0.6, 0.2, rng, out);
    CHECK(std::abs(out[0] + out[1] + out[2] - 0.6) <= 1e-12);
}

TEST_CASE("bridge conditional variance and covariance") {
    // Given dW = 0 and k sub-steps of size d: Var = d (1 - 1/k), Cov = -d / k.
    const std::size_t draws = 100000;
    const double d = 0.5;
    double s1 = 0.0, s11 = 0.0, s12 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        NormalStream rng(SeedPath{8, i, 0, 0, 0});
        double out2[2];
        bridge_split(0.0, d, rng, out2);
        s1 += out2[0];
        s11 += out2[0] * out2[0];
    }
    CHECK(s11 / draws == doctest::Approx(d / 2.0).epsilon(0.05));
    CHECK(std::abs(s1 / draws) < 4.0 * std::sqrt(d / 2.0 / draws));

    const std::size_t k = 4;
    for (std::size_t i = 0; i < draws; ++i) {
        const double dw[1] = {0.3};
        const auto parts = subdivide_interval(dw, k, d, SeedPath{9, i, 0, 0, 0});
        s12 += (parts[0][0] - 0.3 / k) * (parts[0][1] - 0.3 / k);
    }
    CHECK(s12 / draws == doctest::Approx(-d / k).epsilon(0.06));
}

TEST_CASE("subdivide_interval") {
    const double dw[2] = {0.0, -0.25};
    SUBCASE("one sub-step returns the increment") {
        const auto parts = subdivide_interval(dw, 1, 0.1, SeedPath{});
        CHECK(parts[0] == std::vector<double>{0.0});
        CHECK(parts[1] == std::vector<double>{-0.25});
    }
    SUBCASE("sums are exact to rounding") {
        const auto parts = subdivide_interval(dw, 4, 0.025, SeedPath{1, 2, 0, 0, 3});
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < 4; ++i) {
            s0 += parts[0][i];
            s1 += parts[1][i];
        }
        CHECK(std::abs(s0) <= 1e-14);
        CHECK(std::abs(s1 + 0.25) <= 1e-14);
    }
    SUBCASE("n_K = 0 is rejected") { CHECK_THROWS_AS(subdivide_interval(dw, 0, 0.1, SeedPath{}), ConfigError); }
}

TEST_CASE("hierarchy levels depend only on the root") {
    const SeedPath root{10, 2, 0, 0, 0};
    const TimeGrid g(0.0, 1.0, 4);
    WienerHierarchy deep(root, 2, g, 2);
    WienerHierarchy shallow(root, 2, g, 2);
    const WienerSegment l3 = deep.level(3);
    CHECK(deep.level(1) == shallow.level(1));
    CHECK(shallow.level(3) == l3);
    CHECK(l3.steps() == 32);
    CHECK(deep.level(0) == generate_segment(root, 2, g));
    const WienerSegment back = coarsen(l3, 8);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t n = 0; n < 4; ++n) CHECK(std::abs(back.increment(c, n) - deep.level(0).increment(c, n)) <= 1e-12);
    CHECK(deep.level_for_steps(16) == 2);
    CHECK(deep.level_for_steps(12) == -1);
    CHECK_THROWS_AS(WienerHierarchy(root, 1, g, 1), ConfigError);
}

TEST_CASE("segment csv dump") {
    const WienerSegment seg(TimeGrid(0.0, 1.0, 2), 2, {0.5, -0.25, 1.0, 0.125});
    std::ostringstream os;
    write_csv(os, seg);
    CHECK(os.str() == "channel,step,increment\n0,0,0.5\n0,1,-0.25\n1,0,1\n1,1,0.125\n");
}
