#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "itosim/iterint.hpp"
#include "itosim/parallel.hpp"

// Monte Carlo studies of the double-integral approximations. Sample i draws
// from SeedPath{seed, i}; results are reduced in sample order.
namespace itosim::experiments {

struct RunOptions {
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    Execution exec = Execution::OpenMP;
    int workers = 1;
};

/// Mean |dW1 dW2 - (I21 + I12)| per interval for EmKloeden and EmIc0.
/// Each of `intervals` steps of size delta is split into 2^max_log2 bridge
/// increments, coarsened to n_K = 2^k, k = 1..max_log2.
struct PairingErrors {
    double delta = 0.0;
    std::vector<std::size_t> n_k;
    std::size_t intervals = 0;
    std::vector<double> kloeden;  // [k][interval]
    std::vector<double> ic0;

    double at(const std::vector<double>& table, std::size_t k, std::size_t interval) const {
        return table[k * intervals + interval];
    }
};

PairingErrors pairing_errors(double delta, std::size_t intervals, std::size_t max_log2, const RunOptions& opts);

/// Mean |I21 - oracle| on the last of `steps` intervals of size delta, for
/// n_K = 2^k, k = 1..max_log2. The oracle is MilsteinL0 at `oracle_factor`
/// times the finest n_K. Levy-Fourier uses p = n_K with independent draws.
struct LastIntervalErrors {
    double delta = 0.0;
    std::vector<std::size_t> n_k;
    std::vector<double> levy_fourier;
    std::vector<double> em_kloeden;
    std::vector<double> em_ic0;
    std::vector<double> milstein_l0;
};

LastIntervalErrors last_interval_errors(double delta, std::size_t steps, std::size_t max_log2,
                                        std::size_t oracle_factor, const RunOptions& opts);

/// E[(I21 - approx)^2] for EmIc0 and MilsteinL0 at each n_K over one step of
/// size delta, against MilsteinL0 on oracle_steps bridge increments.
/// Every n_K must divide oracle_steps.
struct SubdivisionMse {
    double delta = 0.0;
    std::size_t oracle_steps = 0;
    std::vector<std::size_t> n_k;
    std::vector<double> em_ic0;
    std::vector<double> milstein_l0;
};

SubdivisionMse subdivision_mse(double delta, const std::vector<std::size_t>& n_k, std::size_t oracle_steps,
                               const RunOptions& opts);

/// E[(I12 - approx)^2] for path-coupled Levy-Fourier at each p, against
/// MilsteinL0 on the same fine_steps bridge increments.
struct LevyFourierMse {
    double delta = 0.0;
    std::size_t fine_steps = 0;
    std::vector<std::size_t> p;
    std::vector<double> mse;
};

LevyFourierMse levy_fourier_mse(double delta, const std::vector<std::size_t>& p, std::size_t fine_steps,
                                const RunOptions& opts);

}  // namespace itosim::experiments
