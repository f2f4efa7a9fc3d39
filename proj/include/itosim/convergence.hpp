#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "itosim/parallel.hpp"
#include "itosim/rng.hpp"
#include "itosim/wiener.hpp"

namespace itosim {

enum class Metric { StrongAbs, WeakMean, Mse, L2Vector };
enum class StudyMode { Truth, Coupled };

std::string_view name(Metric metric);
/// Accepts strong, weak, mse, l2 and the long forms strong_abs, weak_mean, l2_vector.
Metric parse_metric(std::string_view text);
std::string_view name(StudyMode mode);
StudyMode parse_mode(std::string_view text);

/// Sub-steps per step for the double-integral subdivision at step size delta.
struct SubdivisionRule {
    enum class Kind { None, Fixed, PerDelta };
    Kind kind = Kind::None;
    /// Fixed: n_K itself. PerDelta: c in n_K = ceil(c / delta).
    double value = 0.0;

    static SubdivisionRule none() { return {}; }
    static SubdivisionRule fixed(std::size_t n_k) { return {Kind::Fixed, static_cast<double>(n_k)}; }
    static SubdivisionRule per_delta(double c) { return {Kind::PerDelta, c}; }

    void validate() const;
    std::size_t n_k(double delta) const;
};

/// Step sizes Delta_r = base_delta / factor^r. Truth mode simulates r < levels
/// and compares each with the exact solution; coupled mode simulates
/// r <= levels and reports `levels` consecutive differences.
struct StudyConfig {
    double t0 = 0.0;
    double t_end = 1.0;
    double base_delta = 1.0 / 32.0;
    std::size_t factor = 2;
    std::size_t levels = 6;
    std::size_t replicates = 1000;
    StudyMode mode = StudyMode::Coupled;
    std::size_t channels = 1;
    std::uint64_t seed = 0;
    Execution exec = Execution::OpenMP;
    int workers = 1;

    /// Throws ConfigError: factor < 2, levels < 3, replicates < 30, or a
    /// base step that does not divide [t0, t_end].
    void validate() const;
    std::size_t resolutions() const { return mode == StudyMode::Truth ? levels : levels + 1; }
    std::size_t steps(std::size_t r) const;
    double delta(std::size_t r) const;
};

/// Noise handed to a solver for one replicate and one resolution. `sub` holds
/// the subdivision increments (steps * n_K on the same interval) when the
/// rule asks for them; `seeds` is reserved for any further randomness.
struct LevelNoise {
    std::size_t level;
    const WienerSegment& steps;
    const WienerSegment* sub;
    SeedPath seeds;
};

/// Returns the terminal state; may throw DivergenceError.
using TerminalSolver = std::function<std::vector<double>(const LevelNoise&)>;
/// Exact terminal state from the finest path of the replicate.
using ExactTerminal = std::function<std::vector<double>(const WienerSegment& finest)>;
/// Scalar terminal functional.
using Functional = std::function<double(std::span<const double>)>;

Functional coordinate(std::size_t index);

/// Terminal states for every replicate and resolution.
struct TerminalSample {
    StudyMode mode = StudyMode::Coupled;
    std::size_t replicates = 0;
    std::size_t resolutions = 0;
    std::size_t dim = 0;
    std::vector<double> deltas;
    std::vector<double> values;           // [replicate][resolution][dim]
    std::vector<double> exact;            // [replicate][dim], truth mode only
    std::vector<std::uint8_t> diverged;   // [replicate][resolution]

    std::span<const double> value(std::size_t rep, std::size_t res) const {
        return {values.data() + (rep * resolutions + res) * dim, dim};
    }
    std::span<const double> exact_value(std::size_t rep) const { return {exact.data() + rep * dim, dim}; }
    bool is_diverged(std::size_t rep, std::size_t res) const { return diverged[rep * resolutions + res] != 0; }
};

/// Runs the solver on one shared Brownian path per replicate.
///
/// Replicate i uses the hierarchy rooted at SeedPath{seed, i}. All step and
/// subdivision grids that are powers-of-factor refinements of the coarsest
/// grid are coarsened, one from the next, out of the finest one, so every
/// coarser path is an exact block sum of the finer one. Subdivisions that do
/// not nest are bridge-refined per step with seed level
/// kSubdivisionLevelBase + r.
TerminalSample simulate_terminals(const TerminalSolver& solver, const StudyConfig& cfg, const SubdivisionRule& rule,
                                  const ExactTerminal* exact);

struct LevelError {
    double delta = 0.0;
    double error = 0.0;
};

struct LevelErrors {
    std::vector<LevelError> levels;
    /// Replicates with a divergent run at any resolution.
    std::size_t divergent = 0;
};

/// Replicates with a divergent run at either compared resolution are dropped
/// from that level. The functional is ignored for L2Vector.
LevelErrors level_errors(const TerminalSample& sample, Metric metric, const Functional& functional);

struct RateReport {
    std::vector<LevelError> levels;
    double slope = 0.0;
    double intercept = 0.0;  // natural log
    double r2 = 0.0;
    std::size_t divergent = 0;
    /// Errors strictly decrease as delta shrinks.
    bool monotone = false;
};

/// OLS of ln(error) on ln(delta). Throws DegenerateDataError with fewer than
/// three levels or any error <= 0.
RateReport fit_rate(std::span<const LevelError> levels, std::size_t divergent = 0);

void write_levels_csv(std::ostream& os, const RateReport& report);
void write_fit_csv(std::ostream& os, const RateReport& report);

}  // namespace itosim
