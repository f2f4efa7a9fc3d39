#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "itosim/error.hpp"
#include "itosim/convergence.hpp"
#include "itosim/models.hpp"
#include "itosim/schemes.hpp"

using namespace itosim;

namespace {

TerminalSolver scalar_solver(const ScalarSde& sde, double x0, bool milstein, double sign = 1.0) {
    return [=](const LevelNoise& noise) {
        const PathResult r = milstein ? milstein_scalar(sde, x0, noise.steps) : euler_scalar(sde, x0, noise.steps);
        return std::vector<double>{sign * r.terminal()[0]};
    };
}

ExactTerminal scalar_exact(const ScalarSde& sde, double x0) {
    return [=](const WienerSegment& finest) {
        return std::vector<double>{sde.exact_solution(finest.grid().t_end(), finest.total(0), x0)};
    };
}

StudyConfig study(double base, std::size_t levels, std::size_t replicates, StudyMode mode, std::uint64_t seed) {
    StudyConfig cfg;
    cfg.base_delta = base;
    cfg.levels = levels;
    cfg.replicates = replicates;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.exec = Execution::Serial;
    return cfg;
}

RateReport rate(const TerminalSample& s, Metric metric) {
    const LevelErrors e = level_errors(s, metric, coordinate(0));
    return fit_rate(e.levels, e.divergent);
}

}  // namespace

TEST_CASE("metric and mode names") {
    CHECK(parse_metric("strong") == Metric::StrongAbs);
    CHECK(parse_metric("strong_abs") == Metric::StrongAbs);
    CHECK(parse_metric("weak") == Metric::WeakMean);
    CHECK(parse_metric("mse") == Metric::Mse);
    CHECK(parse_metric("l2") == Metric::L2Vector);
    CHECK(parse_metric("l2_vector") == Metric::L2Vector);
    CHECK_THROWS_AS(parse_metric("max"), ConfigError);
    CHECK(parse_mode("truth") == StudyMode::Truth);
    CHECK(parse_mode(name(StudyMode::Coupled)) == StudyMode::Coupled);
    CHECK_THROWS_AS(parse_mode("both"), ConfigError);
}

TEST_CASE("subdivision rules") {
    CHECK(SubdivisionRule::none().n_k(0.1) == 0);
    CHECK(SubdivisionRule::fixed(5).n_k(0.1) == 5);
    CHECK(SubdivisionRule::per_delta(1.0).n_k(0.125) == 8);
    CHECK(SubdivisionRule::per_delta(0.5).n_k(1.0 / 64.0) == 32);
    CHECK(SubdivisionRule::per_delta(1.0).n_k(0.3) == 4);
    CHECK_THROWS_AS(SubdivisionRule::fixed(0).validate(), ConfigError);
    CHECK_THROWS_AS(SubdivisionRule::per_delta(-1.0).validate(), ConfigError);
}

TEST_CASE("study configuration checks") {
    StudyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.steps(0) == 32);
    CHECK(cfg.steps(3) == 256);
    CHECK(cfg.delta(2) == 1.0 / 128.0);
    CHECK(cfg.resolutions() == 7);
    cfg.mode = StudyMode::Truth;
    CHECK(cfg.resolutions() == 6);
    StudyConfig bad = cfg;
    bad.factor = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.levels = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.replicates = 10;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.base_delta = 0.3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("rate fit on exact power laws") {
    SUBCASE("3 delta^0.5") {
        std::vector<LevelError> l;
        for (double d : {0.5, 0.25, 0.125, 0.0625}) l.push_back({d, 3.0 * std::sqrt(d)});
        const RateReport r = fit_rate(l);
        CHECK(r.slope == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        CHECK(std::abs(r.r2 - 1.0) < 1e-12);
        CHECK(r.monotone);
    }
    SUBCASE("linear with any constant") {
        for (double c : {1e-6, 0.7, 42.0}) {
            std::vector<LevelError> l;
            for (double d : {0.1, 0.05, 0.025}) l.push_back({d, c * d});
            CHECK(fit_rate(l).slope == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("degenerate inputs") {
        const std::vector<LevelError> two{{0.5, 1.0}, {0.25, 0.5}};
        CHECK_THROWS_AS(fit_rate(two), DegenerateDataError);
        const std::vector<LevelError> zero{{0.5, 1.0}, {0.25, 0.0}, {0.125, 0.1}};
        CHECK_THROWS_AS(fit_rate(zero), DegenerateDataError);
    }
    SUBCASE("monotonicity flag") {
        const std::vector<LevelError> l{{0.5, 1.0}, {0.25, 1.2}, {0.125, 0.1}};
        CHECK_FALSE(fit_rate(l).monotone);
    }
    SUBCASE("csv output") {
        const std::vector<LevelError> l{{0.5, 1.0}, {0.25, 0.5}, {0.125, 0.25}};
        std::ostringstream levels, fit;
        write_levels_csv(levels, fit_rate(l, 3));
        write_fit_csv(fit, fit_rate(l, 3));
        CHECK(levels.str() == "delta,error\n0.5,1\n0.25,0.5\n0.125,0.25\n");
        CHECK(fit.str().rfind("slope,intercept,r2,divergent_count\n", 0) == 0);
        CHECK(fit.str().find(",3\n") != std::string::npos);
    }
}

TEST_CASE("zero model gives zero errors") {
    const auto zero = [](double, double) { return 0.0; };
    ScalarSde s;
    s.drift = s.diffusion = s.milstein_term = zero;
    const TerminalSample t = simulate_terminals(scalar_solver(s, 1.0, true), study(0.25, 3, 30, StudyMode::Coupled, 1),
                                                SubdivisionRule::none(), nullptr);
    const LevelErrors e = level_errors(t, Metric::Mse, coordinate(0));
    for (const LevelError& l : e.levels) CHECK(l.error == 0.0);
    CHECK_THROWS_AS(fit_rate(e.levels), DegenerateDataError);
}

TEST_CASE("deterministic model: euler order one, weak equals strong") {
    ScalarSde s;
    s.drift = [](double, double x) { return x; };
    s.diffusion = s.milstein_term = [](double, double) { return 0.0; };
    s.exact_solution = [](double t, double, double x0) { return x0 * std::exp(t); };
    const TerminalSample t = simulate_terminals(scalar_solver(s, 1.0, false), study(0.125, 4, 30, StudyMode::Coupled, 2),
                                                SubdivisionRule::none(), nullptr);
    const LevelErrors strong = level_errors(t, Metric::StrongAbs, coordinate(0));
    const LevelErrors weak = level_errors(t, Metric::WeakMean, coordinate(0));
    for (std::size_t r = 0; r < strong.levels.size(); ++r)
        CHECK(weak.levels[r].error == doctest::Approx(strong.levels[r].error).epsilon(1e-12));
    CHECK(fit_rate(strong.levels).slope == doctest::Approx(1.0).epsilon(0.05));

    const ExactTerminal exact = scalar_exact(s, 1.0);
    const TerminalSample truth = simulate_terminals(scalar_solver(s, 1.0, false), study(0.125, 4, 30, StudyMode::Truth, 2),
                                                    SubdivisionRule::none(), &exact);
    CHECK(rate(truth, Metric::StrongAbs).slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("truth mode requires an exact solution") {
    const ScalarSde bs = make_black_scholes({});
    CHECK_THROWS_AS(simulate_terminals(scalar_solver(bs, 1.0, false), study(0.25, 3, 30, StudyMode::Truth, 0),
                                       SubdivisionRule::none(), nullptr),
                    ConfigError);
}

TEST_CASE("weak order of euler on geometric brownian motion") {
    const ScalarSde bs = make_black_scholes({1.0, 0.5, 1.0});
    const ExactTerminal exact = scalar_exact(bs, 1.0);
    StudyConfig cfg = study(0.125, 4, 20000, StudyMode::Truth, 3);
    const TerminalSample t = simulate_terminals(scalar_solver(bs, 1.0, false), cfg, SubdivisionRule::none(), &exact);
    const double slope = rate(t, Metric::WeakMean).slope;
    MESSAGE("weak slope " << slope);
    CHECK(slope >= 0.6);
    CHECK(slope <= 1.4);

    const TerminalSample neg = simulate_terminals(scalar_solver(bs, 1.0, false, -1.0), [&] {
        StudyConfig c = cfg;
        c.mode = StudyMode::Coupled;
        return c;
    }(), SubdivisionRule::none(), nullptr);
    const TerminalSample pos = simulate_terminals(scalar_solver(bs, 1.0, false), [&] {
        StudyConfig c = cfg;
        c.mode = StudyMode::Coupled;
        return c;
    }(), SubdivisionRule::none(), nullptr);
    const LevelErrors a = level_errors(pos, Metric::WeakMean, coordinate(0));
    const LevelErrors b = level_errors(neg, Metric::WeakMean, coordinate(0));
    for (std::size_t r = 0; r < a.levels.size(); ++r) CHECK(a.levels[r].error == b.levels[r].error);
}

TEST_CASE("mean-square slopes on geometric brownian motion") {
    const ScalarSde bs = make_black_scholes({1.0, 0.5, 1.0});
    const StudyConfig cfg = study(1.0 / 16.0, 4, 1000, StudyMode::Coupled, 4);
    const TerminalSample em = simulate_terminals(scalar_solver(bs, 1.0, false), cfg, SubdivisionRule::none(), nullptr);
    const TerminalSample mil = simulate_terminals(scalar_solver(bs, 1.0, true), cfg, SubdivisionRule::none(), nullptr);
    const double em_mse = rate(em, Metric::Mse).slope;
    const double mil_mse = rate(mil, Metric::Mse).slope;
    const double em_strong = rate(em, Metric::StrongAbs).slope;
    MESSAGE("mse slopes " << em_mse << " " << mil_mse << ", strong " << em_strong);
    CHECK(em_mse == doctest::Approx(1.0).epsilon(0.3));
    CHECK(mil_mse == doctest::Approx(2.0).epsilon(0.15));
    CHECK(std::abs(em_mse - 2.0 * em_strong) < 0.3);
}

TEST_CASE("coarser paths are block sums of finer ones") {
    StudyConfig cfg = study(0.25, 3, 30, StudyMode::Coupled, 5);
    cfg.channels = 2;
    const TerminalSolver totals = [](const LevelNoise& noise) {
        const WienerSegment& s = noise.steps;
        std::vector<double> out{s.total(0), s.total(1), s.cumulative(0)[s.steps() / 2]};
        if (noise.sub != nullptr) {
            REQUIRE(noise.sub->steps() % s.steps() == 0);
            const WienerSegment back = coarsen(*noise.sub, noise.sub->steps() / s.steps());
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t n = 0; n < s.steps(); ++n)
                    REQUIRE(back.increment(c, n) == doctest::Approx(s.increment(c, n)).epsilon(1e-12).scale(1e-14));
        }
        return out;
    };
    for (const SubdivisionRule& rule : {SubdivisionRule::none(), SubdivisionRule::fixed(4), SubdivisionRule::fixed(3),
                                        SubdivisionRule::per_delta(0.5)}) {
        const TerminalSample t = simulate_terminals(totals, cfg, rule, nullptr);
        for (std::size_t i = 0; i < t.replicates; ++i)
            for (std::size_t r = 1; r < t.resolutions; ++r)
                for (std::size_t c = 0; c < 3; ++c)
                    REQUIRE(t.value(i, r)[c] == doctest::Approx(t.value(i, 0)[c]).epsilon(1e-12).scale(1e-14));
    }
}

TEST_CASE("divergent replicates are excluded and counted") {
    const ScalarSde bs = make_black_scholes({1.0, 0.5, 1.0});
    const TerminalSolver base = scalar_solver(bs, 1.0, false);
    const TerminalSolver flaky = [&](const LevelNoise& noise) {
        if (noise.level == 2 && noise.steps.increment(0, 0) > 0.1) throw DivergenceError(0, "test");
        return base(noise);
    };
    const StudyConfig cfg = study(0.25, 3, 200, StudyMode::Coupled, 6);
    const TerminalSample t = simulate_terminals(flaky, cfg, SubdivisionRule::none(), nullptr);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < t.replicates; ++i) expected += t.is_diverged(i, 2) ? 1 : 0;
    CHECK(expected > 0);
    CHECK(expected < 100);
    const LevelErrors e = level_errors(t, Metric::StrongAbs, coordinate(0));
    CHECK(e.divergent == expected);

    const TerminalSample clean = simulate_terminals(base, cfg, SubdivisionRule::none(), nullptr);
    // Level 0 compares resolutions 0 and 1, untouched by the failures.
    CHECK(e.levels[0].error == level_errors(clean, Metric::StrongAbs, coordinate(0)).levels[0].error);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < t.replicates; ++i) {
        if (t.is_diverged(i, 2)) continue;
        sum += std::abs(clean.value(i, 1)[0] - clean.value(i, 2)[0]);
        ++used;
    }
    CHECK(e.levels[1].error == doctest::Approx(sum / static_cast<double>(used)).epsilon(1e-14));
}

TEST_CASE("vector l2 metric") {
    StudyConfig cfg = study(0.25, 3, 30, StudyMode::Coupled, 7);
    cfg.channels = 2;
    const TerminalSolver two = [](const LevelNoise& noise) {
        const double t = 1.0 / static_cast<double>(noise.steps.steps());
        return std::vector<double>{3.0 * t, 4.0 * t};
    };
    const LevelErrors e = level_errors(simulate_terminals(two, cfg, SubdivisionRule::none(), nullptr), Metric::L2Vector, {});
    CHECK(e.levels[0].error == doctest::Approx(5.0 * (0.25 - 0.125)));
    CHECK(e.levels[2].error == doctest::Approx(5.0 * (1.0 / 16.0 - 1.0 / 32.0)));
}

TEST_CASE("serial and parallel studies agree bit for bit") {
    const ScalarSde bs = make_black_scholes({});
    StudyConfig cfg = study(1.0 / 8.0, 3, 64, StudyMode::Coupled, 8);
    const TerminalSample serial = simulate_terminals(scalar_solver(bs, 1.0, true), cfg, SubdivisionRule::fixed(4), nullptr);
    cfg.exec = Execution::OpenMP;
    cfg.workers = 4;
    const TerminalSample parallel = simulate_terminals(scalar_solver(bs, 1.0, true), cfg, SubdivisionRule::fixed(4), nullptr);
    CHECK(serial.values == parallel.values);
    CHECK(serial.diverged == parallel.diverged);
}
