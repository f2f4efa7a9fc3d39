#pragma once

#include <span>

#include "itosim/iterint.hpp"
#include "itosim/sde.hpp"
#include "itosim/wiener.hpp"

namespace itosim {

/// dX = r X dt + sigma X dW.
struct BlackScholesParams {
    double r = 2.0;
    double sigma = 1.0;
    double x0 = 1.0;

    void validate() const;
};

/// Drift r x, diffusion sigma x, Milstein term sigma^2 x and the closed form
/// X_t = X_0 exp(sigma W_t + (r - sigma^2 / 2) t).
ScalarSde make_black_scholes(const BlackScholesParams& p);

/// Generalized Heston with correlation rho, written on two independent channels:
///   dS = r S dt + S sqrt(v) dW1
///   dv = kappa (theta - v) dt + rho xi v^eta dW1 + sqrt(1 - rho^2) xi v^eta dW2
/// Defaults are the reference parameter set.
struct HestonParams {
    double r = 0.04;
    double theta = 0.07;
    double kappa = 3.0;
    double xi = 0.24;
    double rho = 0.1;
    double eta = 2.0 / 3.0;
    double s0 = 100.0;
    double v0 = 0.25;

    void validate() const;
};

/// max(v, 0).
inline double positive_part(double v) noexcept { return v > 0.0 ? v : 0.0; }
/// (v+)^e, with 0^e = 0 for e < 0.
double truncated_pow(double v, double e);

/// State (S, v), general noise. Coefficients see v+ = max(v, 0) (full
/// truncation); the drift and the state keep the raw v. The flag marks steps
/// that start from v < 0.
MultiSde make_heston(const HestonParams& p);

/// Euler on the decorrelated system.
PathResult heston_euler(const HestonParams& p, const WienerSegment& seg);
/// Milstein with the scalar correction on each equation; v is driven by dW2 only.
PathResult heston_milstein_1d(const HestonParams& p, const WienerSegment& seg);
/// Full Milstein; reads I_(2,1) for every step from the table.
PathResult heston_milstein_2d(const HestonParams& p, const WienerSegment& seg, const iterint::MixedIntegralTable& table);
PathResult heston_milstein_2d(const HestonParams& p, const WienerSegment& seg, const iterint::DoubleIntegralMethod& method,
                              const WienerSegment* sub, const SeedPath& seeds);

enum class OptionKind { Call, Put };

struct OptionSpec {
    OptionKind kind = OptionKind::Call;
    double strike = 100.0;
    double maturity = 1.0;
    double rate = 0.04;

    void validate() const;
};

/// e^{-rT} max(+-(s_T - K), 0) for one path.
double discounted_payoff(double s_t, const OptionSpec& spec);
/// Mean discounted payoff; throws DegenerateDataError on empty input.
double price_option(std::span<const double> terminal_prices, const OptionSpec& spec);

}  // namespace itosim
