#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itosim/convergence.hpp"
#include "itosim/iterint.hpp"
#include "itosim/models.hpp"

namespace itosim::cli {

struct ModelConfig {
    std::string name = "black_scholes";  // or "heston"
    BlackScholesParams black_scholes;
    HestonParams heston;

    std::size_t noise_channels() const { return name == "heston" ? 2 : 1; }
};

struct MethodConfig {
    iterint::MethodKind kind = iterint::MethodKind::MilsteinL0;
    iterint::FourierCoupling coupling = iterint::FourierCoupling::Independent;
    /// n_K for the subdivision methods, p for Levy-Fourier.
    SubdivisionRule resolution = SubdivisionRule::fixed(1);

    bool needs_subdivision() const {
        return kind != iterint::MethodKind::LevyFourier || coupling == iterint::FourierCoupling::Path;
    }
};

/// Black-Scholes: euler, milstein. Heston: euler, milstein_1d, milstein_2d,
/// milstein_md (the generic multidimensional stepper on the Heston SDE).
struct SchemeConfig {
    std::string label;
    std::string scheme;
    std::optional<MethodConfig> method;
};

struct StudySection {
    double base_delta = 1.0 / 32.0;
    std::size_t factor = 2;
    std::size_t levels = 6;
    std::size_t replicates = 1000;
    StudyMode mode = StudyMode::Coupled;
    Metric metric = Metric::StrongAbs;
    double max_divergent_fraction = 0.05;
};

/// Experiments: pairing, last_interval, mse_law, levy_rate.
struct IntegralsSection {
    std::string experiment;
    double delta = 0.0625;
    std::size_t samples = 1000;
    std::size_t intervals = 5;
    std::size_t steps = 32;
    std::size_t max_log2 = 9;
    std::size_t oracle_factor = 256;
    std::size_t oracle_steps = 16384;
    std::size_t fine_steps = 16384;
    std::vector<std::size_t> n_k;
    std::vector<std::size_t> p;
};

struct RunConfig {
    ModelConfig model;
    double t0 = 0.0;
    double t_end = 1.0;
    std::vector<SchemeConfig> schemes;
    StudySection study;
    /// state, asset, variance, call, put.
    std::vector<std::string> functionals;
    double strike = 100.0;
    std::size_t simulate_steps = 1024;
    IntegralsSection integrals;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string output = "out";
};

/// Parses a JSON config. Throws ConfigError naming the offending field, or the
/// line and column of a syntax error.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace itosim::cli
