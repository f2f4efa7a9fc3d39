#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "itosim/rng.hpp"
#include "itosim/wiener.hpp"

// Mixed double Ito integrals I_(j1,j2) = int int dW^{j1}_s dW^{j2}_t over one step.
// Index convention: j1 is the inner integrator, j2 the outer one, so the
// auxiliary system dY1 = Y2 dW1, dY2 = dW2 started at zero ends at I_(2,1).
namespace itosim::iterint {

enum class MethodKind { LevyFourier, EmKloeden, EmIc0, MilsteinL0 };

/// How Levy-Fourier obtains its auxiliary Gaussians.
///   Independent: fresh N(0,1) draws per step (a pure sampler, the usual setting).
///   Path: Fourier coefficients of the Brownian bridge of a supplied fine path,
///         so the approximation converges pathwise to that path's integral.
enum class FourierCoupling { Independent, Path };

struct DoubleIntegralMethod {
    MethodKind kind = MethodKind::MilsteinL0;
    std::size_t resolution = 1;  // p for Levy-Fourier, n_K for the subdivision methods
    FourierCoupling coupling = FourierCoupling::Independent;

    bool is_subdivision() const noexcept { return kind != MethodKind::LevyFourier; }
    /// Throws ConfigError when resolution == 0.
    void validate() const;
};

std::string_view name(MethodKind kind);
/// Accepts levy_fourier, em_kloeden, em_ic0, milstein_l0.
MethodKind parse_method(std::string_view text);

/// Both orderings of one mixed integral; levy_area() = i12 - i21.
struct IntegralPair {
    double i12 = 0.0;
    double i21 = 0.0;

    double levy_area() const noexcept { return i12 - i21; }
};

/// I_(j,j) = ((dW)^2 - delta) / 2.
inline double diagonal_exact(double dw, double delta) noexcept { return 0.5 * (dw * dw - delta); }

struct DwDz {
    double dw = 0.0;
    double dz = 0.0;
};

/// Joint draw of (dW, dZ = int dW ds): Var dW = delta, Var dZ = delta^3/3, Cov = delta^2/2.
DwDz sample_dw_dz(double delta, NormalStream& rng);

/// rho_p = 1/12 - (1/(2 pi^2)) sum_{r<=p} 1/r^2. Always > 0.
double levy_rho(std::size_t p);

/// Auxiliary variables of the truncated Fourier expansion for one channel pair.
struct FourierAux {
    std::size_t p = 0;
    double mu[2] = {0.0, 0.0};
    std::vector<double> zeta[2];
    std::vector<double> eta[2];

    static FourierAux zeros(std::size_t p);
};

/// 2(2p+1) i.i.d. N(0,1) draws: mu1, mu2, zeta1[], zeta2[], eta1[], eta2[].
FourierAux draw_fourier_aux(std::size_t p, NormalStream& rng);

/// Expansion coefficients of the Brownian bridge of the piecewise-linear path
/// through the given sub-increments, normalised to N(0,1) under Wiener
/// measure. mu carries the exact tail beyond p. Requires p < sub.size() / 2.
FourierAux bridge_fourier_aux(std::span<const double> sub1, std::span<const double> sub2, double delta,
                              std::size_t p);

/// Truncated expansion for I_(1,2); i21 follows from the pairing identity.
IntegralPair levy_fourier(double dw1, double dw2, double delta, const FourierAux& aux);
IntegralPair levy_fourier(double dw1, double dw2, double delta, std::size_t p, NormalStream& rng);

/// Euler recursion Y1 += Y2 dW1, Y2 += dW2 from (0, w_start_2); approximates I_(2,1)
/// only when w_start_2 == 0.
double em_kloeden(std::span<const double> d1, std::span<const double> d2, double w_start_2);
/// Euler recursion from (0, 0); approximates I_(2,1).
double em_ic0(std::span<const double> d1, std::span<const double> d2);
/// Milstein recursion with zero Levy area, Y1 += Y2 dW1 + dW1 dW2 / 2, from (0, 0).
double milstein_l0(std::span<const double> d1, std::span<const double> d2);

/// Both orderings by a subdivision method: i21 from (d1, d2), i12 by relabelling.
/// w1_start / w2_start are only read by EmKloeden.
IntegralPair subdivision_pair(MethodKind kind, std::span<const double> d1, std::span<const double> d2,
                              double w1_start = 0.0, double w2_start = 0.0);

/// Milstein L=0 on a fine grid, used as the "true" integral in tests and
/// experiments. Callers should refine at least 64x below the grid under test.
IntegralPair reference_oracle(std::span<const double> d1, std::span<const double> d2);

/// Index of unordered channel pair (a, b), a < b, among m channels.
std::size_t pair_index(std::size_t a, std::size_t b, std::size_t m);

/// Off-diagonal integrals for every step and channel pair of a segment.
class MixedIntegralTable {
public:
    MixedIntegralTable(std::size_t steps, std::size_t channels);

    std::size_t steps() const noexcept { return steps_; }
    std::size_t channels() const noexcept { return channels_; }

    IntegralPair& pair(std::size_t step, std::size_t a, std::size_t b) {
        return data_[step * pairs_ + pair_index(a, b, channels_)];
    }
    const IntegralPair& pair(std::size_t step, std::size_t a, std::size_t b) const {
        return data_[step * pairs_ + pair_index(a, b, channels_)];
    }
    /// I_(j1,j2) for j1 != j2.
    double integral(std::size_t step, std::size_t j1, std::size_t j2) const {
        return j1 < j2 ? pair(step, j1, j2).i12 : pair(step, j2, j1).i21;
    }

private:
    std::size_t steps_;
    std::size_t channels_;
    std::size_t pairs_;
    std::vector<IntegralPair> data_;
};

/// Builds the table for `steps`.
///
/// Subdivision methods read sub-increments from `sub` (steps * n_K steps on the
/// same interval) when given, and otherwise bridge-split step n on demand with
/// seeds.with_node(n). Levy-Fourier draws pair q of step n from
/// seeds.with_channel(kAuxChannelBase + q).with_node(n), or, with Path
/// coupling, reads coefficients from `sub`.
MixedIntegralTable build_mixed_integrals(const WienerSegment& steps, const DoubleIntegralMethod& method,
                                         const WienerSegment* sub, const SeedPath& seeds);

}  // namespace itosim::iterint
