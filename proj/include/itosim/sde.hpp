#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "itosim/time_grid.hpp"

namespace itosim {

/// dX = a(t, X) dt + b(t, X) dW with one noise channel.
struct ScalarSde {
    std::function<double(double t, double x)> drift;
    std::function<double(double t, double x)> diffusion;
    /// b * db/dx.
    std::function<double(double t, double x)> milstein_term;
    /// Optional closed form X_t given W_t - W_0 and X_0.
    std::function<double(double t, double w, double x0)> exact_solution;

    /// Throws ConfigError when drift, diffusion or milstein_term is missing.
    void validate() const;
};

enum class NoiseStructure { General, Commutative, Diagonal, Additive };

using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// out[i] = L^{j1} b^{i,j2}(t, x) for i = 0..d-1 (0-based channel indices).
struct MilsteinTerm {
    std::size_t j1 = 0;
    std::size_t j2 = 0;
    VectorField fn;
};

/// dX^i = a^i dt + sum_j b^{i,j} dW^j, i < d, j < m.
struct MultiSde {
    std::size_t d = 1;
    std::size_t m = 1;
    VectorField drift;      // out has d entries
    VectorField diffusion;  // out has d * m entries, b^{i,j} at i * m + j
    /// Sparse; omitted pairs are identically zero.
    std::vector<MilsteinTerm> milstein;
    NoiseStructure noise = NoiseStructure::General;
    /// Optional per-step diagnostic evaluated on the state before each step.
    std::function<bool(double t, std::span<const double> x)> flag;

    void validate() const;
};

/// States at every grid node, row-major (N + 1) x d.
struct PathResult {
    TimeGrid grid;
    std::size_t dim = 1;
    std::vector<double> states;
    /// flags[n] is set when the model's diagnostic fired at the start of step n.
    std::vector<std::uint8_t> flags;

    std::span<const double> state(std::size_t n) const { return {states.data() + n * dim, dim}; }
    std::span<const double> terminal() const { return state(grid.steps()); }
    std::size_t flagged_steps() const;
};

}  // namespace itosim
