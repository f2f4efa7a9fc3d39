#include "itosim/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "itosim/csv.hpp"
#include "itosim/error.hpp"

namespace itosim {

std::string_view name(Metric metric) {
    switch (metric) {
        case Metric::StrongAbs: return "strong";
        case Metric::WeakMean: return "weak";
        case Metric::Mse: return "mse";
        case Metric::L2Vector: return "l2";
    }
    return "unknown";
}

Metric parse_metric(std::string_view text) {
    if (text == "strong" || text == "strong_abs") return Metric::StrongAbs;
    if (text == "weak" || text == "weak_mean") return Metric::WeakMean;
    if (text == "mse") return Metric::Mse;
    if (text == "l2" || text == "l2_vector") return Metric::L2Vector;
    throw ConfigError("unknown metric '" + std::string(text) + "'");
}

std::string_view name(StudyMode mode) { return mode == StudyMode::Truth ? "truth" : "coupled"; }

StudyMode parse_mode(std::string_view text) {
    if (text == "truth") return StudyMode::Truth;
    if (text == "coupled") return StudyMode::Coupled;
    throw ConfigError("unknown study mode '" + std::string(text) + "'");
}

void SubdivisionRule::validate() const {
    if (kind == Kind::None) return;
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("subdivision rule value must be > 0");
    if (kind == Kind::Fixed && value != std::floor(value)) throw ConfigError("fixed n_K must be an integer");
}

std::size_t SubdivisionRule::n_k(double delta) const {
    switch (kind) {
        case Kind::None: return 0;
        case Kind::Fixed: return static_cast<std::size_t>(value);
        case Kind::PerDelta: {
            const double raw = value / delta;
            const double nearest = std::round(raw);
            const double n = std::abs(raw - nearest) <= 1e-9 * raw ? nearest : std::ceil(raw);
            return std::max<std::size_t>(1, static_cast<std::size_t>(n));
        }
    }
    return 0;
}

void StudyConfig::validate() const {
    if (factor < 2) throw ConfigError("study: refinement factor must be >= 2");
    if (levels < 3) throw ConfigError("study: at least 3 levels are required");
    if (replicates < 30) throw ConfigError("study: at least 30 replicates are required");
    if (channels < 1) throw ConfigError("study: at least one noise channel is required");
    if (!(t_end > t0)) throw ConfigError("study: t_end must exceed t0");
    if (!(base_delta > 0.0) || base_delta > t_end - t0) throw ConfigError("study: base_delta must lie in (0, T - t0]");
    const double ratio = (t_end - t0) / base_delta;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("study: base_delta does not divide [t0, T]");
    if (workers < 1) throw ConfigError("study: workers must be >= 1");
}

std::size_t StudyConfig::steps(std::size_t r) const {
    std::size_t n = static_cast<std::size_t>(std::llround((t_end - t0) / base_delta));
    for (std::size_t i = 0; i < r; ++i) n *= factor;
    return n;
}

double StudyConfig::delta(std::size_t r) const { return (t_end - t0) / static_cast<double>(steps(r)); }

Functional coordinate(std::size_t index) {
    return [index](std::span<const double> x) {
        if (index >= x.size()) throw ConfigError("functional: coordinate out of range");
        return x[index];
    };
}

namespace {

// Power of `factor` relating `steps` to `root`, or -1.
int nesting_level(std::size_t root, std::size_t steps, std::size_t factor) {
    int level = 0;
    std::size_t n = root;
    while (n < steps) {
        n *= factor;
        ++level;
    }
    return n == steps ? level : -1;
}

}  // namespace

TerminalSample simulate_terminals(const TerminalSolver& solver, const StudyConfig& cfg, const SubdivisionRule& rule,
                                  const ExactTerminal* exact) {
    cfg.validate();
    rule.validate();
    if (cfg.mode == StudyMode::Truth && (exact == nullptr || !*exact))
        throw ConfigError("truth mode needs an exact solution");

    const std::size_t res = cfg.resolutions();
    const std::size_t root_steps = cfg.steps(0);
    const TimeGrid root_grid(cfg.t0, cfg.t_end, root_steps);

    std::vector<std::size_t> sub_steps(res, 0);
    std::vector<int> sub_level(res, -1);
    int deepest = static_cast<int>(res) - 1;
    for (std::size_t r = 0; r < res; ++r) {
        const std::size_t n_k = rule.n_k(cfg.delta(r));
        if (n_k == 0) continue;
        sub_steps[r] = cfg.steps(r) * n_k;
        sub_level[r] = nesting_level(root_steps, sub_steps[r], cfg.factor);
        deepest = std::max(deepest, sub_level[r]);
    }
    // Every nested grid, finest first.
    std::vector<int> needed;
    for (std::size_t r = 0; r < res; ++r) needed.push_back(static_cast<int>(r));
    for (int l : sub_level)
        if (l >= 0) needed.push_back(l);
    std::sort(needed.begin(), needed.end(), std::greater<>());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

    TerminalSample sample;
    sample.mode = cfg.mode;
    sample.replicates = cfg.replicates;
    sample.resolutions = res;
    for (std::size_t r = 0; r < res; ++r) sample.deltas.push_back(cfg.delta(r));
    std::vector<std::vector<double>> outputs(cfg.replicates * res);
    std::vector<std::vector<double>> exact_out(cfg.mode == StudyMode::Truth ? cfg.replicates : 0);
    sample.diverged.assign(cfg.replicates * res, 0);

    for_each_index(cfg.replicates, cfg.exec, cfg.workers, [&](std::size_t i) {
        const SeedPath root{cfg.seed, i, 0, 0, 0};
        std::map<int, WienerSegment> grids;
        {
            WienerHierarchy hierarchy(root, cfg.channels, root_grid, cfg.factor);
            grids.emplace(deepest, hierarchy.level(static_cast<std::size_t>(deepest)));
        }
        for (std::size_t k = 1; k < needed.size(); ++k) {
            const int finer = needed[k - 1];
            const int coarser = needed[k];
            std::size_t ratio = 1;
            for (int s = coarser; s < finer; ++s) ratio *= cfg.factor;
            grids.emplace(coarser, coarsen(grids.at(finer), ratio));
        }
        if (cfg.mode == StudyMode::Truth) exact_out[i] = (*exact)(grids.at(deepest));
        for (std::size_t r = 0; r < res; ++r) {
            const WienerSegment& steps = grids.at(static_cast<int>(r));
            const SeedPath seeds = root.with_level(kSubdivisionLevelBase + static_cast<std::uint32_t>(r));
            std::optional<WienerSegment> local;
            const WienerSegment* sub = nullptr;
            if (sub_steps[r] != 0) {
                if (sub_level[r] >= 0) {
                    sub = &grids.at(sub_level[r]);
                } else {
                    local.emplace(refine_bridge(steps, sub_steps[r] / steps.steps(), seeds));
                    sub = &*local;
                }
            }
            try {
                outputs[i * res + r] = solver(LevelNoise{r, steps, sub, seeds});
            } catch (const DivergenceError&) {
                sample.diverged[i * res + r] = 1;
            }
        }
    });

    std::size_t dim = 0;
    for (std::size_t j = 0; j < outputs.size(); ++j)
        if (!sample.diverged[j]) {
            dim = outputs[j].size();
            break;
        }
    if (dim == 0 && !exact_out.empty()) dim = exact_out[0].size();
    if (dim == 0) throw DegenerateDataError("study: every run diverged");
    sample.dim = dim;
    sample.values.assign(cfg.replicates * res * dim, 0.0);
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        if (sample.diverged[j]) continue;
        if (outputs[j].size() != dim) throw Error("study: solver returned states of varying dimension");
        std::copy(outputs[j].begin(), outputs[j].end(), sample.values.begin() + static_cast<std::ptrdiff_t>(j * dim));
    }
    for (std::size_t i = 0; i < exact_out.size(); ++i) {
        if (exact_out[i].size() != dim) throw Error("study: exact solution dimension differs from the solver's");
        sample.exact.insert(sample.exact.end(), exact_out[i].begin(), exact_out[i].end());
    }
    return sample;
}

LevelErrors level_errors(const TerminalSample& sample, Metric metric, const Functional& functional) {
    if (metric != Metric::L2Vector && !functional) throw ConfigError("level_errors: missing functional");
    const bool truth = sample.mode == StudyMode::Truth;
    const std::size_t count = truth ? sample.resolutions : sample.resolutions - 1;

    LevelErrors out;
    for (std::size_t i = 0; i < sample.replicates; ++i)
        for (std::size_t r = 0; r < sample.resolutions; ++r)
            if (sample.is_diverged(i, r)) {
                ++out.divergent;
                break;
            }

    for (std::size_t r = 0; r < count; ++r) {
        double sum = 0.0;
        double mean_a = 0.0;
        double mean_b = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < sample.replicates; ++i) {
            if (sample.is_diverged(i, r) || (!truth && sample.is_diverged(i, r + 1))) continue;
            const std::span<const double> a = sample.value(i, r);
            const std::span<const double> b = truth ? sample.exact_value(i) : sample.value(i, r + 1);
            ++used;
            switch (metric) {
                case Metric::StrongAbs: sum += std::abs(functional(a) - functional(b)); break;
                case Metric::Mse: {
                    const double diff = functional(a) - functional(b);
                    sum += diff * diff;
                    break;
                }
                case Metric::L2Vector: {
                    double sq = 0.0;
                    for (std::size_t c = 0; c < a.size(); ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
                    sum += std::sqrt(sq);
                    break;
                }
                case Metric::WeakMean:
                    mean_a += functional(a);
                    mean_b += functional(b);
                    break;
            }
        }
        if (used == 0) throw DegenerateDataError("level_errors: every replicate diverged at some level");
        const double n = static_cast<double>(used);
        const double error = metric == Metric::WeakMean ? std::abs(mean_a / n - mean_b / n) : sum / n;
        out.levels.push_back({sample.deltas[r], error});
    }
    return out;
}

RateReport fit_rate(std::span<const LevelError> levels, std::size_t divergent) {
    if (levels.size() < 3) throw DegenerateDataError("fit_rate: at least 3 levels are required");
    for (const LevelError& l : levels) {
        if (!(l.error > 0.0) || !std::isfinite(l.error))
            throw DegenerateDataError("fit_rate: non-positive error " + csv::format(l.error) + " at delta " +
                                      csv::format(l.delta));
        if (!(l.delta > 0.0)) throw DegenerateDataError("fit_rate: non-positive step size");
    }
    const double n = static_cast<double>(levels.size());
    double mx = 0.0;
    double my = 0.0;
    for (const LevelError& l : levels) {
        mx += std::log(l.delta);
        my += std::log(l.error);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const LevelError& l : levels) {
        const double dx = std::log(l.delta) - mx;
        const double dy = std::log(l.error) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateDataError("fit_rate: all step sizes are equal");

    RateReport report;
    report.levels.assign(levels.begin(), levels.end());
    report.slope = sxy / sxx;
    report.intercept = my - report.slope * mx;
    double ss_res = 0.0;
    for (const LevelError& l : levels) {
        const double e = std::log(l.error) - (report.intercept + report.slope * std::log(l.delta));
        ss_res += e * e;
    }
    report.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    report.divergent = divergent;
    report.monotone = true;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const bool finer = levels[i].delta < levels[i - 1].delta;
        if (finer != (levels[i].error < levels[i - 1].error)) report.monotone = false;
    }
    return report;
}

void write_levels_csv(std::ostream& os, const RateReport& report) {
    csv::write_header(os, {"delta", "error"});
    for (const LevelError& l : report.levels) {
        const double row[2] = {l.delta, l.error};
        csv::write_row(os, row);
    }
}

void write_fit_csv(std::ostream& os, const RateReport& report) {
    csv::write_header(os, {"slope", "intercept", "r2", "divergent_count"});
    os << csv::format(report.slope) << ',' << csv::format(report.intercept) << ',' << csv::format(report.r2) << ','
       << report.divergent << '\n';
}

}  // namespace itosim
