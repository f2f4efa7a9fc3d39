#include "itosim/models.hpp"

#include <cmath>
#include <string>

#include "itosim/error.hpp"

namespace itosim {

void BlackScholesParams::validate() const {
    if (!std::isfinite(r)) throw ConfigError("black_scholes: r must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("black_scholes: sigma must be >= 0");
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw ConfigError("black_scholes: x0 must be > 0");
}

ScalarSde make_black_scholes(const BlackScholesParams& p) {
    p.validate();
    ScalarSde sde;
    sde.drift = [r = p.r](double, double x) { return r * x; };
    sde.diffusion = [s = p.sigma](double, double x) { return s * x; };
    sde.milstein_term = [s2 = p.sigma * p.sigma](double, double x) { return s2 * x; };
    sde.exact_solution = [p](double t, double w, double x0) {
        return x0 * std::exp(p.sigma * w + (p.r - 0.5 * p.sigma * p.sigma) * t);
    };
    return sde;
}

void HestonParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("heston: ") + name + " must be > 0");
    };
    positive(kappa, "kappa");
    positive(theta, "theta");
    positive(s0, "s0");
    positive(v0, "v0");
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw ConfigError("heston: xi must be >= 0");
    if (!std::isfinite(r)) throw ConfigError("heston: r must be finite");
    if (!(std::abs(rho) < 1.0)) throw ConfigError("heston: |rho| must be < 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("heston: eta must lie in (0, 1]");
}

double truncated_pow(double v, double e) {
    const double vp = positive_part(v);
    if (vp == 0.0 && e < 0.0) return 0.0;
    return std::pow(vp, e);
}

MultiSde make_heston(const HestonParams& p) {
    p.validate();
    const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
    MultiSde sde;
    sde.d = 2;
    sde.m = 2;
    sde.noise = NoiseStructure::General;
    sde.drift = [p](double, std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * p.r;
        out[1] = p.kappa * (p.theta - x[1]);
    };
    sde.diffusion = [p, rho_bar](double, std::span<const double> x, std::span<double> out) {
        const double vol = p.xi * truncated_pow(x[1], p.eta);
        out[0] = x[0] * std::sqrt(positive_part(x[1]));
        out[1] = 0.0;
        out[2] = p.rho * vol;
        out[3] = rho_bar * vol;
    };
    auto s_half = [p](std::span<const double> x) { return p.xi * x[0] * truncated_pow(x[1], p.eta - 0.5); };
    auto v_row = [p](std::span<const double> x) { return p.eta * p.xi * p.xi * truncated_pow(x[1], 2.0 * p.eta - 1.0); };
    sde.milstein = {
        {0, 0,
         [p, s_half, v_row](double, std::span<const double> x, std::span<double> out) {
             out[0] = x[0] * positive_part(x[1]) + 0.5 * p.rho * s_half(x);
             out[1] = p.rho * p.rho * v_row(x);
         }},
        {0, 1,
         [p, rho_bar, v_row](double, std::span<const double> x, std::span<double> out) {
             out[0] = 0.0;
             out[1] = p.rho * rho_bar * v_row(x);
         }},
        {1, 0,
         [p, rho_bar, s_half, v_row](double, std::span<const double> x, std::span<double> out) {
             out[0] = 0.5 * rho_bar * s_half(x);
             out[1] = p.rho * rho_bar * v_row(x);
         }},
        {1, 1,
         [rho_bar, v_row](double, std::span<const double> x, std::span<double> out) {
             out[0] = 0.0;
             out[1] = rho_bar * rho_bar * v_row(x);
         }},
    };
    sde.flag = [](double, std::span<const double> x) { return x[1] < 0.0; };
    return sde;
}

namespace {

enum class HestonScheme { Euler, Milstein1d, Milstein2d };

PathResult run_heston(const HestonParams& p, const WienerSegment& seg, HestonScheme scheme,
                      const iterint::MixedIntegralTable* table) {
    p.validate();
    if (seg.channels() != 2) throw ConfigError("heston: Wiener segment must have 2 channels");
    if (table != nullptr && (table->steps() != seg.steps() || table->channels() != 2))
        throw GridMismatchError("heston: double-integral table does not match the Wiener segment");
    const TimeGrid& grid = seg.grid();
    const double delta = grid.delta();
    const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
    PathResult result{grid, 2, std::vector<double>((seg.steps() + 1) * 2), std::vector<std::uint8_t>(seg.steps(), 0)};
    double s = p.s0;
    double v = p.v0;
    result.states[0] = s;
    result.states[1] = v;
    for (std::size_t n = 0; n < seg.steps(); ++n) {
        const double dw1 = seg.increment(0, n);
        const double dw2 = seg.increment(1, n);
        if (v < 0.0) result.flags[n] = 1;
        const double vp = positive_part(v);
        const double vol_v = p.xi * truncated_pow(v, p.eta);
        double s_next = s + (s * p.r) * delta + (s * std::sqrt(vp)) * dw1;
        double v_next = v + p.kappa * (p.theta - v) * delta;
        switch (scheme) {
            case HestonScheme::Euler:
                v_next += vol_v * (p.rho * dw1 + rho_bar * dw2);
                break;
            case HestonScheme::Milstein1d:
                s_next += (0.5 * s * vp) * (dw1 * dw1 - delta);
                v_next += vol_v * dw2 +
                          0.5 * p.eta * p.xi * p.xi * truncated_pow(v, 2.0 * p.eta - 1.0) * (dw2 * dw2 - delta);
                break;
            case HestonScheme::Milstein2d: {
                const double s_half = p.xi * s * truncated_pow(v, p.eta - 0.5);
                const double i21 = table->pair(n, 0, 1).i21;
                const double c = p.rho * dw1 + rho_bar * dw2;
                s_next += (0.5 * rho_bar * s_half) * i21;
                s_next += (0.5 * s * vp + 0.25 * p.rho * s_half) * (dw1 * dw1 - delta);
                v_next += vol_v * c + 0.5 * p.eta * p.xi * p.xi * truncated_pow(v, 2.0 * p.eta - 1.0) * (c * c - delta);
                break;
            }
        }
        if (!std::isfinite(s_next) || !std::isfinite(v_next))
            throw DivergenceError(n, "heston: non-finite state");
        s = s_next;
        v = v_next;
        result.states[2 * (n + 1)] = s;
        result.states[2 * (n + 1) + 1] = v;
    }
    return result;
}

}  // namespace

PathResult heston_euler(const HestonParams& p, const WienerSegment& seg) {
    return run_heston(p, seg, HestonScheme::Euler, nullptr);
}

PathResult heston_milstein_1d(const HestonParams& p, const WienerSegment& seg) {
    return run_heston(p, seg, HestonScheme::Milstein1d, nullptr);
}

PathResult heston_milstein_2d(const HestonParams& p, const WienerSegment& seg, const iterint::MixedIntegralTable& table) {
    return run_heston(p, seg, HestonScheme::Milstein2d, &table);
}

PathResult heston_milstein_2d(const HestonParams& p, const WienerSegment& seg, const iterint::DoubleIntegralMethod& method,
                              const WienerSegment* sub, const SeedPath& seeds) {
    const iterint::MixedIntegralTable table = iterint::build_mixed_integrals(seg, method, sub, seeds);
    return run_heston(p, seg, HestonScheme::Milstein2d, &table);
}

void OptionSpec::validate() const {
    if (!(strike > 0.0)) throw ConfigError("option: strike must be > 0");
    if (!(maturity > 0.0)) throw ConfigError("option: maturity must be > 0");
    if (!std::isfinite(rate)) throw ConfigError("option: rate must be finite");
}

double discounted_payoff(double s_t, const OptionSpec& spec) {
    const double intrinsic = spec.kind == OptionKind::Call ? s_t - spec.strike : spec.strike - s_t;
    return std::exp(-spec.rate * spec.maturity) * (intrinsic > 0.0 ? intrinsic : 0.0);
}

double price_option(std::span<const double> terminal_prices, const OptionSpec& spec) {
    spec.validate();
    if (terminal_prices.empty()) throw DegenerateDataError("price_option: no terminal prices");
    double sum = 0.0;
    for (double s : terminal_prices) sum += discounted_payoff(s, spec);
    return sum / static_cast<double>(terminal_prices.size());
}

}  // namespace itosim
