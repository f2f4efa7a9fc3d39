#include <doctest.h>

#include <cmath>
#include <vector>

#include "itosim/error.hpp"
#include "itosim/models.hpp"
#include "itosim/schemes.hpp"

using namespace itosim;

namespace {

WienerSegment one_step(double delta, std::vector<double> dw) {
    const std::size_t m = dw.size();
    return WienerSegment(TimeGrid(0.0, delta, 1), m, std::move(dw));
}

ScalarSde scalar(std::function<double(double, double)> a, std::function<double(double, double)> b,
                 std::function<double(double, double)> l) {
    ScalarSde s;
    s.drift = std::move(a);
    s.diffusion = std::move(b);
    s.milstein_term = std::move(l);
    return s;
}

ScalarSde gbm_like(double mu, double sigma) {
    return scalar([=](double, double x) { return mu * x; }, [=](double, double x) { return sigma * x; },
                  [=](double, double x) { return sigma * sigma * x; });
}

MultiSde as_multi(const ScalarSde& s) {
    MultiSde m;
    m.d = 1;
    m.m = 1;
    m.drift = [s](double t, std::span<const double> x, std::span<double> out) { out[0] = s.drift(t, x[0]); };
    m.diffusion = [s](double t, std::span<const double> x, std::span<double> out) { out[0] = s.diffusion(t, x[0]); };
    m.milstein = {{0, 0, [s](double t, std::span<const double> x, std::span<double> out) {
                       out[0] = s.milstein_term(t, x[0]);
                   }}};
    return m;
}

// dX = mu X dt + s1 X dW1 + s2 X dW2: L^{j1} b^{j2} = s_{j1} s_{j2} x is symmetric.
MultiSde commutative_toy(double mu, double s1, double s2, NoiseStructure tag) {
    MultiSde m;
    m.d = 1;
    m.m = 2;
    m.noise = tag;
    m.drift = [=](double, std::span<const double> x, std::span<double> out) { out[0] = mu * x[0]; };
    m.diffusion = [=](double, std::span<const double> x, std::span<double> out) {
        out[0] = s1 * x[0];
        out[1] = s2 * x[0];
    };
    const double s[2] = {s1, s2};
    for (std::size_t j1 = 0; j1 < 2; ++j1)
        for (std::size_t j2 = 0; j2 < 2; ++j2) {
            const double c = s[j1] * s[j2];
            m.milstein.push_back({j1, j2, [c](double, std::span<const double> x, std::span<double> out) {
                                      out[0] = c * x[0];
                                  }});
        }
    return m;
}

MultiSde diagonal_toy() {
    MultiSde m;
    m.d = 2;
    m.m = 2;
    m.noise = NoiseStructure::Diagonal;
    m.drift = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = 0.5 * x[0];
        out[1] = -x[1];
    };
    m.diffusion = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = 0.3 * x[0];
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = 0.8 * x[1];
    };
    m.milstein = {{0, 0, [](double, std::span<const double> x, std::span<double> out) {
                       out[0] = 0.3 * 0.3 * x[0];
                       out[1] = 0.0;
                   }},
                  {1, 1, [](double, std::span<const double> x, std::span<double> out) {
                       out[0] = 0.0;
                       out[1] = 0.8 * 0.8 * x[1];
                   }}};
    return m;
}

}  // namespace

TEST_CASE("scalar euler") {
    const WienerSegment seg = generate_segment(SeedPath{1, 0, 0, 0, 0}, 1, TimeGrid(0.0, 1.0, 16));
    SUBCASE("zero coefficients keep the state") {
        const auto zero = [](double, double) { return 0.0; };
        const PathResult r = euler_scalar(scalar(zero, zero, zero), 5.0, seg);
        REQUIRE(r.states.size() == 17);
        for (double x : r.states) CHECK(x == 5.0);
    }
    SUBCASE("deterministic growth") {
        const auto zero = [](double, double) { return 0.0; };
        const PathResult r =
            euler_scalar(scalar([](double, double x) { return x; }, zero, zero), 1.0, one_step(0.1, {0.7}));
        CHECK(r.states[1] == doctest::Approx(1.1));
    }
    SUBCASE("non-finite state reports the step") {
        const ScalarSde blow = scalar([](double, double x) { return x * x * 1e200; }, [](double, double) { return 0.0; },
                                      [](double, double) { return 0.0; });
        try {
            euler_scalar(blow, 1e100, seg);
            FAIL("expected divergence");
        } catch (const DivergenceError& e) {
            CHECK(e.step() == 0);
        }
    }
    SUBCASE("channel count") {
        const WienerSegment two = generate_segment(SeedPath{}, 2, TimeGrid(0.0, 1.0, 4));
        CHECK_THROWS_AS(euler_scalar(gbm_like(1.0, 1.0), 1.0, two), ConfigError);
    }
}

TEST_CASE("scalar milstein") {
    const WienerSegment seg = generate_segment(SeedPath{2, 0, 0, 0, 0}, 1, TimeGrid(0.0, 1.0, 32));
    SUBCASE("zero diffusion matches euler") {
        const auto zero = [](double, double) { return 0.0; };
        const ScalarSde s = scalar([](double t, double x) { return std::sin(t) * x; }, zero, zero);
        CHECK(milstein_scalar(s, 2.0, seg).states == euler_scalar(s, 2.0, seg).states);
    }
    SUBCASE("one step of dX = X dW") {
        const double w = 0.37, d = 0.2;
        const PathResult r = milstein_scalar(gbm_like(0.0, 1.0), 1.0, one_step(d, {w}));
        CHECK(r.states[1] == doctest::Approx(1.0 + w + 0.5 * (w * w - d)));
    }
    SUBCASE("zero volatility black-scholes is the euler recursion") {
        const ScalarSde bs = make_black_scholes({2.0, 0.0, 1.0});
        const PathResult e = euler_scalar(bs, 1.0, seg);
        const PathResult m = milstein_scalar(bs, 1.0, seg);
        double x = 1.0;
        for (std::size_t n = 1; n <= 32; ++n) {
            x = x + 2.0 * x * (1.0 / 32.0);
            CHECK(e.states[n] == doctest::Approx(x).epsilon(1e-15));
            CHECK(m.states[n] == doctest::Approx(x).epsilon(1e-15));
        }
    }
}

TEST_CASE("multidimensional schemes reduce to scalar ones") {
    const WienerSegment seg = generate_segment(SeedPath{3, 0, 0, 0, 0}, 1, TimeGrid(0.0, 1.0, 64));
    const ScalarSde s = gbm_like(0.7, 0.9);
    const MultiSde m = as_multi(s);
    const double x0[1] = {1.3};
    CHECK(euler_md(m, x0, seg).states == euler_scalar(s, 1.3, seg).states);
    CHECK(milstein_md(m, x0, seg, nullptr).states == milstein_scalar(s, 1.3, seg).states);
    CHECK(milstein_md(m, x0, seg, {iterint::MethodKind::EmIc0, 4}, nullptr, SeedPath{}).states ==
          milstein_scalar(s, 1.3, seg).states);
}

TEST_CASE("additive noise") {
    MultiSde m;
    m.d = 2;
    m.m = 2;
    m.noise = NoiseStructure::Additive;
    m.drift = [](double, std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
    const double c[4] = {1.0, 2.0, -0.5, 0.25};
    m.diffusion = [&](double, std::span<const double>, std::span<double> out) {
        for (int k = 0; k < 4; ++k) out[k] = c[k];
    };
    const double x0[2] = {1.0, -1.0};
    const PathResult one = euler_md(m, x0, one_step(0.1, {0.3, -0.2}));
    CHECK(one.states[2] == doctest::Approx(1.0 + 0.3 - 0.4));
    CHECK(one.states[3] == doctest::Approx(-1.0 - 0.15 - 0.05));

    const WienerSegment seg = generate_segment(SeedPath{4, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 32));
    CHECK(milstein_md(m, x0, seg, nullptr).states == euler_md(m, x0, seg).states);
}

TEST_CASE("zero milstein terms reduce to euler") {
    MultiSde m = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::General);
    for (MilsteinTerm& t : m.milstein) t.fn = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    const WienerSegment seg = generate_segment(SeedPath{5, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 32));
    const double x0[1] = {1.0};
    const PathResult e = euler_md(m, x0, seg);
    const PathResult ms = milstein_md(m, x0, seg, {iterint::MethodKind::MilsteinL0, 8}, nullptr, SeedPath{5, 0, 0, 0, 0});
    REQUIRE(e.states.size() == ms.states.size());
    for (std::size_t k = 0; k < e.states.size(); ++k) CHECK(ms.states[k] == doctest::Approx(e.states[k]).epsilon(1e-15));
    m.milstein.clear();
    CHECK(milstein_md(m, x0, seg, {iterint::MethodKind::MilsteinL0, 8}, nullptr, SeedPath{}).states == e.states);
}

TEST_CASE("commutative update matches the general update with oracle integrals") {
    const MultiSde general = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::General);
    const MultiSde comm = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::Commutative);
    const WienerSegment seg = generate_segment(SeedPath{6, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 16));
    const double x0[1] = {1.0};
    const PathResult a = milstein_md(comm, x0, seg, nullptr);
    const PathResult b = milstein_md(general, x0, seg, {iterint::MethodKind::MilsteinL0, 256}, nullptr,
                                     SeedPath{6, 0, 0, 0, 0}.with_level(kSubdivisionLevelBase));
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == doctest::Approx(b.states[k]).epsilon(1e-12));

    std::vector<double> out(1), out_general(1);
    const double x[1] = {2.0};
    const double dw[2] = {0.1, -0.3};
    milstein_commutative_step(comm, 0.0, 0.0625, x, dw, out);
    CHECK(out[0] == doctest::Approx(2.0 + 0.3 * 2.0 * 0.0625 + 2.0 * (0.4 * 0.1 - 0.6 * 0.3) +
                                    2.0 * 0.5 * std::pow(0.4 * 0.1 - 0.6 * 0.3, 2) - 2.0 * 0.5 * (0.16 + 0.36) * 0.0625));
    CHECK_THROWS_AS(milstein_commutative_step(general, 0.0, 0.1, x, dw, out_general), ConfigError);
}

TEST_CASE("commutative step with zero increments") {
    const MultiSde comm = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::Commutative);
    std::vector<double> out(1);
    const double x[1] = {1.5};
    const double dw[2] = {0.0, 0.0};
    milstein_commutative_step(comm, 0.0, 0.1, x, dw, out);
    CHECK(out[0] == doctest::Approx(1.5 + 0.3 * 1.5 * 0.1 - 0.5 * (0.16 + 0.36) * 1.5 * 0.1));
}

TEST_CASE("diagonal noise decouples") {
    const MultiSde m = diagonal_toy();
    const WienerSegment seg = generate_segment(SeedPath{7, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 32));
    const double x0[2] = {1.0, 2.0};
    const PathResult r = milstein_md(m, x0, seg, nullptr);
    const ScalarSde s0 = gbm_like(0.5, 0.3);
    const ScalarSde s1 = gbm_like(-1.0, 0.8);
    const WienerSegment c0(seg.grid(), 1, std::vector<double>(seg.channel(0).begin(), seg.channel(0).end()));
    const WienerSegment c1(seg.grid(), 1, std::vector<double>(seg.channel(1).begin(), seg.channel(1).end()));
    const PathResult p0 = milstein_scalar(s0, 1.0, c0);
    const PathResult p1 = milstein_scalar(s1, 2.0, c1);
    for (std::size_t n = 0; n <= 32; ++n) {
        CHECK(r.state(n)[0] == p0.states[n]);
        CHECK(r.state(n)[1] == p1.states[n]);
    }
    std::vector<double> out(2);
    const double dw[2] = {0.1, 0.2};
    CHECK_NOTHROW(milstein_diagonal_step(m, 0.0, 0.1, x0, dw, out));
    CHECK(out[0] == doctest::Approx(1.0 + 0.5 * 0.1 + 0.3 * 0.1 + 0.09 * iterint::diagonal_exact(0.1, 0.1)));
    const MultiSde general = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::General);
    std::vector<double> one(1);
    const double x1[1] = {1.0};
    CHECK_THROWS_AS(milstein_diagonal_step(general, 0.0, 0.1, x1, dw, one), ConfigError);
}

TEST_CASE("multidimensional argument checks") {
    const MultiSde general = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::General);
    const WienerSegment seg = generate_segment(SeedPath{}, 2, TimeGrid(0.0, 1.0, 4));
    const WienerSegment one = generate_segment(SeedPath{}, 1, TimeGrid(0.0, 1.0, 4));
    const double x0[1] = {1.0};
    const double x2[2] = {1.0, 1.0};
    CHECK_THROWS_AS(euler_md(general, x2, seg), ConfigError);
    CHECK_THROWS_AS(euler_md(general, x0, one), ConfigError);
    CHECK_THROWS_AS(milstein_md(general, x0, seg, nullptr), ConfigError);
    const iterint::MixedIntegralTable wrong(3, 2);
    CHECK_THROWS_AS(milstein_md(general, x0, seg, &wrong), GridMismatchError);
    MultiSde bad = general;
    bad.milstein.push_back({2, 0, bad.milstein[0].fn});
    CHECK_THROWS_AS(euler_md(bad, x0, seg), ConfigError);
}

TEST_CASE("milstein correction order is lexicographic") {
    // Registration order must not change results.
    MultiSde a = commutative_toy(0.3, 0.4, 0.6, NoiseStructure::General);
    MultiSde b = a;
    std::reverse(b.milstein.begin(), b.milstein.end());
    const WienerSegment seg = generate_segment(SeedPath{8, 0, 0, 0, 0}, 2, TimeGrid(0.0, 1.0, 16));
    const double x0[1] = {1.0};
    const iterint::DoubleIntegralMethod method{iterint::MethodKind::EmIc0, 8};
    CHECK(milstein_md(a, x0, seg, method, nullptr, SeedPath{8, 0, 0, 0, 0}).states ==
          milstein_md(b, x0, seg, method, nullptr, SeedPath{8, 0, 0, 0, 0}).states);
}
