#pragma once

#include <span>

#include "itosim/iterint.hpp"
#include "itosim/sde.hpp"
#include "itosim/wiener.hpp"

// Steppers throw DivergenceError(step) on the first non-finite state and
// ConfigError on dimension mismatches.
namespace itosim {

PathResult euler_scalar(const ScalarSde& sde, double x0, const WienerSegment& seg);
PathResult milstein_scalar(const ScalarSde& sde, double x0, const WienerSegment& seg);

PathResult euler_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg);

/// Milstein with off-diagonal integrals taken from `table`. General noise with
/// m >= 2 requires a table; other noise structures ignore it.
PathResult milstein_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg,
                       const iterint::MixedIntegralTable* table);

/// Builds the table with `method` when the noise structure needs one.
/// `sub` and `seeds` are forwarded to iterint::build_mixed_integrals.
PathResult milstein_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg,
                       const iterint::DoubleIntegralMethod& method, const WienerSegment* sub,
                       const SeedPath& seeds);

/// One step with I_(j1,j2) + I_(j2,j1) = dW^{j1} dW^{j2} split evenly; requires
/// NoiseStructure::Commutative.
void milstein_commutative_step(const MultiSde& sde, double t, double delta, std::span<const double> x,
                               std::span<const double> dw, std::span<double> out);

/// Componentwise step using only the (j, j) terms; requires NoiseStructure::Diagonal.
void milstein_diagonal_step(const MultiSde& sde, double t, double delta, std::span<const double> x,
                            std::span<const double> dw, std::span<double> out);

}  // namespace itosim
