#include "itosim/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "itosim/convergence.hpp"
#include "itosim/csv.hpp"
#include "itosim/error.hpp"
#include "itosim/experiments.hpp"
#include "itosim/schemes.hpp"

namespace itosim::cli {

namespace fs = std::filesystem;

void apply(RunConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) {
        if (*o.workers < 1) throw ConfigError("--workers must be >= 1");
        cfg.workers = *o.workers;
    }
    if (o.out) cfg.output = *o.out;
    if (o.mode) cfg.study.mode = parse_mode(*o.mode);
    if (o.metric) cfg.study.metric = parse_metric(*o.metric);
}

namespace {

fs::path prepare_output(const RunConfig& cfg) {
    const fs::path dir(cfg.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + cfg.output + "'");
    return dir;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    return os;
}

iterint::DoubleIntegralMethod integral_method(const MethodConfig& m, std::size_t resolution) {
    return {m.kind, resolution, m.coupling};
}

// Sub-steps per step requested from the study. Path-coupled Levy-Fourier
// reads its coefficients from a path four times finer than p.
SubdivisionRule study_rule(const SchemeConfig& s) {
    if (!s.method || !s.method->needs_subdivision()) return SubdivisionRule::none();
    SubdivisionRule rule = s.method->resolution;
    if (s.method->kind == iterint::MethodKind::LevyFourier) rule.value *= 4.0;
    return rule;
}

std::vector<double> terminal_of(const PathResult& path) {
    const auto t = path.terminal();
    return {t.begin(), t.end()};
}

// Terminal path of one scheme on given noise; `sub` may be null.
PathResult run_scheme(const RunConfig& cfg, const SchemeConfig& s, const WienerSegment& steps, const WienerSegment* sub,
                      const SeedPath& seeds) {
    if (cfg.model.name == "black_scholes") {
        const ScalarSde sde = make_black_scholes(cfg.model.black_scholes);
        const double x0 = cfg.model.black_scholes.x0;
        return s.scheme == "euler" ? euler_scalar(sde, x0, steps) : milstein_scalar(sde, x0, steps);
    }
    const HestonParams& hp = cfg.model.heston;
    if (s.scheme == "euler") return heston_euler(hp, steps);
    if (s.scheme == "milstein_1d") return heston_milstein_1d(hp, steps);
    const MethodConfig& m = *s.method;
    std::size_t resolution = m.resolution.n_k(steps.grid().delta());
    if (sub != nullptr && m.kind != iterint::MethodKind::LevyFourier) resolution = sub->steps() / steps.steps();
    const iterint::DoubleIntegralMethod method = integral_method(m, resolution);
    if (s.scheme == "milstein_2d") return heston_milstein_2d(hp, steps, method, sub, seeds);
    const double x0[2] = {hp.s0, hp.v0};
    return milstein_md(make_heston(hp), x0, steps, method, sub, seeds);
}

Functional make_functional(const RunConfig& cfg, const std::string& name) {
    if (name == "state" || name == "asset") return coordinate(0);
    if (name == "variance") return coordinate(1);
    OptionSpec spec;
    spec.kind = name == "call" ? OptionKind::Call : OptionKind::Put;
    spec.strike = cfg.strike;
    spec.maturity = cfg.t_end - cfg.t0;
    spec.rate = cfg.model.name == "heston" ? cfg.model.heston.r : cfg.model.black_scholes.r;
    spec.validate();
    return [spec](std::span<const double> x) { return discounted_payoff(x[0], spec); };
}

void write_levels(std::ostream& os, const std::vector<LevelError>& levels) {
    csv::write_header(os, {"delta", "error"});
    for (const LevelError& l : levels) {
        const double row[2] = {l.delta, l.error};
        csv::write_row(os, row);
    }
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    if (cfg.schemes.empty()) throw ConfigError("config field 'schemes': at least one scheme is required");
    const fs::path dir = prepare_output(cfg);
    const TimeGrid grid(cfg.t0, cfg.t_end, cfg.simulate_steps);
    const SeedPath root{cfg.seed, 0, 0, 0, 0};
    const WienerSegment seg = generate_segment(root, cfg.model.noise_channels(), grid);
    for (const SchemeConfig& s : cfg.schemes) {
        const SubdivisionRule rule = study_rule(s);
        std::optional<WienerSegment> sub;
        const SeedPath seeds = root.with_level(kSubdivisionLevelBase);
        if (rule.kind != SubdivisionRule::Kind::None) sub.emplace(refine_bridge(seg, rule.n_k(grid.delta()), seeds));
        const PathResult path = run_scheme(cfg, s, seg, sub ? &*sub : nullptr, seeds);
        std::ofstream os = open_csv(dir / (s.label + "_path.csv"));
        os << "t";
        for (std::size_t i = 1; i <= path.dim; ++i) os << ",state_" << i;
        os << '\n';
        for (std::size_t n = 0; n <= grid.steps(); ++n) {
            os << csv::format(grid.node(n));
            for (double v : path.state(n)) os << ',' << csv::format(v);
            os << '\n';
        }
        log << s.label << ": " << grid.steps() << " steps";
        if (!path.flags.empty()) log << ", " << path.flagged_steps() << " steps started from negative variance";
        log << '\n';
    }
    return kOk;
}

int cmd_converge(const RunConfig& cfg, std::ostream& log) {
    if (cfg.schemes.empty()) throw ConfigError("config field 'schemes': at least one scheme is required");
    const bool truth = cfg.study.mode == StudyMode::Truth;
    if (truth && cfg.model.name != "black_scholes")
        throw ConfigError("truth mode needs a model with an exact solution (" + cfg.model.name + " has none)");

    StudyConfig study;
    study.t0 = cfg.t0;
    study.t_end = cfg.t_end;
    study.base_delta = cfg.study.base_delta;
    study.factor = cfg.study.factor;
    study.levels = cfg.study.levels;
    study.replicates = cfg.study.replicates;
    study.mode = cfg.study.mode;
    study.channels = cfg.model.noise_channels();
    study.seed = cfg.seed;
    study.exec = Execution::OpenMP;
    study.workers = cfg.workers;
    study.validate();
    const fs::path dir = prepare_output(cfg);

    ExactTerminal exact;
    if (truth) {
        const ScalarSde sde = make_black_scholes(cfg.model.black_scholes);
        const double x0 = cfg.model.black_scholes.x0;
        const double horizon = cfg.t_end - cfg.t0;
        exact = [sde, x0, horizon](const WienerSegment& w) {
            return std::vector<double>{sde.exact_solution(horizon, w.total(0), x0)};
        };
    }

    const std::vector<std::string> functionals =
        cfg.study.metric == Metric::L2Vector ? std::vector<std::string>{"l2"} : cfg.functionals;
    std::ostringstream summary;
    csv::write_header(summary, {"scheme", "gamma", "logC", "r2", "divergent"});
    bool degenerate = false;
    bool too_many_divergent = false;

    for (const SchemeConfig& s : cfg.schemes) {
        const TerminalSolver solver = [&cfg, &s](const LevelNoise& n) {
            return terminal_of(run_scheme(cfg, s, n.steps, n.sub, n.seeds));
        };
        const TerminalSample sample = simulate_terminals(solver, study, study_rule(s), truth ? &exact : nullptr);
        std::size_t divergent = 0;
        for (std::size_t i = 0; i < sample.replicates; ++i)
            for (std::size_t r = 0; r < sample.resolutions; ++r)
                if (sample.is_diverged(i, r)) {
                    ++divergent;
                    break;
                }
        if (static_cast<double>(divergent) > cfg.study.max_divergent_fraction * static_cast<double>(study.replicates)) {
            log << s.label << ": " << divergent << " of " << study.replicates << " replicates diverged\n";
            too_many_divergent = true;
        }
        for (const std::string& f : functionals) {
            const std::string id = functionals.size() == 1 ? s.label : s.label + "_" + f;
            const Functional fn = f == "l2" ? Functional{} : make_functional(cfg, f);
            LevelErrors errors;
            try {
                errors = level_errors(sample, cfg.study.metric, fn);
            } catch (const DegenerateDataError& e) {
                log << id << ": " << e.what() << '\n';
                degenerate = true;
                continue;
            }
            {
                std::ofstream os = open_csv(dir / (id + "_levels.csv"));
                write_levels(os, errors.levels);
            }
            RateReport report;
            try {
                report = fit_rate(errors.levels, errors.divergent);
            } catch (const DegenerateDataError& e) {
                log << id << ": " << e.what() << '\n';
                degenerate = true;
                continue;
            }
            {
                std::ofstream os = open_csv(dir / (id + "_fit.csv"));
                write_fit_csv(os, report);
            }
            summary << id << ',' << csv::format(report.slope) << ',' << csv::format(report.intercept) << ','
                    << csv::format(report.r2) << ',' << report.divergent << '\n';
            log << id << ": gamma=" << csv::format(report.slope) << " logC=" << csv::format(report.intercept)
                << " r2=" << csv::format(report.r2) << " divergent=" << report.divergent
                << (report.monotone ? "" : " (errors not monotone)") << '\n';
        }
    }
    std::ofstream os = open_csv(dir / "summary.csv");
    os << summary.str();
    if (too_many_divergent) {
        log << "divergent fraction above " << cfg.study.max_divergent_fraction << '\n';
        return kDivergence;
    }
    if (degenerate) return kConfigError;
    return kOk;
}

int cmd_integrals(const RunConfig& cfg, std::ostream& log) {
    const IntegralsSection& s = cfg.integrals;
    if (s.experiment.empty()) throw ConfigError("config field 'integrals': section is required");
    const fs::path dir = prepare_output(cfg);
    const experiments::RunOptions opts{cfg.seed, s.samples, Execution::OpenMP, cfg.workers};
    std::ofstream os = open_csv(dir / (s.experiment + ".csv"));
    if (s.experiment == "pairing") {
        const experiments::PairingErrors r = experiments::pairing_errors(s.delta, s.intervals, s.max_log2, opts);
        csv::write_header(os, {"n_k", "interval", "em_kloeden", "em_ic0"});
        for (std::size_t k = 0; k < r.n_k.size(); ++k)
            for (std::size_t n = 0; n < r.intervals; ++n)
                os << r.n_k[k] << ',' << n << ',' << csv::format(r.at(r.kloeden, k, n)) << ','
                   << csv::format(r.at(r.ic0, k, n)) << '\n';
    } else if (s.experiment == "last_interval") {
        const experiments::LastIntervalErrors r =
            experiments::last_interval_errors(s.delta, s.steps, s.max_log2, s.oracle_factor, opts);
        csv::write_header(os, {"k", "n_k", "levy_fourier", "em_kloeden", "em_ic0", "milstein_l0"});
        for (std::size_t k = 0; k < r.n_k.size(); ++k)
            os << k + 1 << ',' << r.n_k[k] << ',' << csv::format(r.levy_fourier[k]) << ','
               << csv::format(r.em_kloeden[k]) << ',' << csv::format(r.em_ic0[k]) << ','
               << csv::format(r.milstein_l0[k]) << '\n';
    } else if (s.experiment == "mse_law") {
        if (s.n_k.empty()) throw ConfigError("config field 'integrals.n_k': required for mse_law");
        const experiments::SubdivisionMse r = experiments::subdivision_mse(s.delta, s.n_k, s.oracle_steps, opts);
        csv::write_header(os, {"n_k", "delta_sub", "em_ic0_mse", "milstein_l0_mse", "em_ic0_ratio", "milstein_l0_ratio"});
        for (std::size_t k = 0; k < r.n_k.size(); ++k) {
            const double sub = s.delta / static_cast<double>(r.n_k[k]);
            os << r.n_k[k] << ',' << csv::format(sub) << ',' << csv::format(r.em_ic0[k]) << ','
               << csv::format(r.milstein_l0[k]) << ',' << csv::format(r.em_ic0[k] / (s.delta * sub)) << ','
               << csv::format(r.milstein_l0[k] / (s.delta * sub)) << '\n';
        }
    } else {
        if (s.p.empty()) throw ConfigError("config field 'integrals.p': required for levy_rate");
        const experiments::LevyFourierMse r = experiments::levy_fourier_mse(s.delta, s.p, s.fine_steps, opts);
        csv::write_header(os, {"p", "mse"});
        for (std::size_t k = 0; k < r.p.size(); ++k) os << r.p[k] << ',' << csv::format(r.mse[k]) << '\n';
    }
    log << s.experiment << ": " << s.samples << " samples written to " << (dir / (s.experiment + ".csv")).string()
        << '\n';
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Strong simulation of Ito SDEs and convergence-order studies", "itosim"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides o;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string dir;
    std::string mode;
    std::string metric;
    for (const char* name : {"simulate", "converge", "integrals"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_option("--out", dir, "output directory (overrides the config)");
        sub->add_option("--mode", mode, "truth or coupled")->check(CLI::IsMember({"truth", "coupled"}));
        sub->add_option("--metric", metric, "strong, weak, mse or l2")->check(CLI::IsMember({"strong", "weak", "mse", "l2"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen->count("--seed")) o.seed = seed;
    if (chosen->count("--workers")) o.workers = workers;
    if (chosen->count("--out")) o.out = dir;
    if (chosen->count("--mode")) o.mode = mode;
    if (chosen->count("--metric")) o.metric = metric;

    try {
        RunConfig cfg = load_config(config_path);
        apply(cfg, o);
        const std::string name = chosen->get_name();
        if (name == "simulate") return cmd_simulate(cfg, out);
        if (name == "converge") return cmd_converge(cfg, out);
        return cmd_integrals(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const GridMismatchError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DegenerateDataError& e) {
        err << "degenerate data: " << e.what() << '\n';
        return kConfigError;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return kDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace itosim::cli
