#include "itosim/iterint.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "itosim/error.hpp"

namespace itosim::iterint {

namespace {

void require_equal_lengths(std::span<const double> d1, std::span<const double> d2, const char* who) {
    if (d1.size() != d2.size())
        throw ConfigError(std::string(who) + ": channel lengths differ (" + std::to_string(d1.size()) + " vs " +
                          std::to_string(d2.size()) + ")");
}

}  // namespace

void DoubleIntegralMethod::validate() const {
    if (resolution == 0)
        throw ConfigError(std::string(name(kind)) + ": resolution parameter must be >= 1");
}

std::string_view name(MethodKind kind) {
    switch (kind) {
        case MethodKind::LevyFourier: return "levy_fourier";
        case MethodKind::EmKloeden: return "em_kloeden";
        case MethodKind::EmIc0: return "em_ic0";
        case MethodKind::MilsteinL0: return "milstein_l0";
    }
    return "unknown";
}

MethodKind parse_method(std::string_view text) {
    for (MethodKind k : {MethodKind::LevyFourier, MethodKind::EmKloeden, MethodKind::EmIc0, MethodKind::MilsteinL0})
        if (name(k) == text) return k;
    throw ConfigError("unknown double-integral method '" + std::string(text) + "'");
}

DwDz sample_dw_dz(double delta, NormalStream& rng) {
    const double z1 = rng.next();
    const double z2 = rng.next();
    const double root = std::sqrt(delta);
    return {root * z1, 0.5 * delta * root * (z1 + z2 / std::numbers::sqrt3)};
}

double levy_rho(std::size_t p) {
    // Smallest terms first.
    double partial = 0.0;
    for (std::size_t r = p; r >= 1; --r) partial += 1.0 / (static_cast<double>(r) * static_cast<double>(r));
    const double rho = 1.0 / 12.0 - partial / (2.0 * std::numbers::pi * std::numbers::pi);
    if (!(rho >= 0.0)) throw Error("levy_rho: negative tail variance");
    return rho;
}

FourierAux FourierAux::zeros(std::size_t p) {
    FourierAux aux;
    aux.p = p;
    for (int j = 0; j < 2; ++j) {
        aux.zeta[j].assign(p, 0.0);
        aux.eta[j].assign(p, 0.0);
    }
    return aux;
}

FourierAux draw_fourier_aux(std::size_t p, NormalStream& rng) {
    if (p == 0) throw ConfigError("levy_fourier: p must be >= 1");
    FourierAux aux = FourierAux::zeros(p);
    aux.mu[0] = rng.next();
    aux.mu[1] = rng.next();
    rng.fill(aux.zeta[0]);
    rng.fill(aux.zeta[1]);
    rng.fill(aux.eta[0]);
    rng.fill(aux.eta[1]);
    return aux;
}

IntegralPair levy_fourier(double dw1, double dw2, double delta, const FourierAux& aux) {
    if (aux.p == 0) throw ConfigError("levy_fourier: p must be >= 1");
    const double root = std::sqrt(delta);
    const double xi1 = dw1 / root;
    const double xi2 = dw2 / root;
    const double sqrt_rho = std::sqrt(levy_rho(aux.p));
    double series = 0.0;
    for (std::size_t r = 0; r < aux.p; ++r) {
        const double term = aux.zeta[0][r] * (std::numbers::sqrt2 * xi2 + aux.eta[1][r]) -
                            aux.zeta[1][r] * (std::numbers::sqrt2 * xi1 + aux.eta[0][r]);
        series += term / static_cast<double>(r + 1);
    }
    IntegralPair out;
    out.i12 = delta * (0.5 * xi1 * xi2 + sqrt_rho * (aux.mu[0] * xi2 - aux.mu[1] * xi1)) +
              delta / (2.0 * std::numbers::pi) * series;
    out.i21 = dw1 * dw2 - out.i12;
    return out;
}

IntegralPair levy_fourier(double dw1, double dw2, double delta, std::size_t p, NormalStream& rng) {
    return levy_fourier(dw1, dw2, delta, draw_fourier_aux(p, rng));
}

double em_kloeden(std::span<const double> d1, std::span<const double> d2, double w_start_2) {
    require_equal_lengths(d1, d2, "em_kloeden");
    double y1 = 0.0;
    double y2 = w_start_2;
    for (std::size_t k = 0; k < d1.size(); ++k) {
        y1 += y2 * d1[k];
        y2 += d2[k];
    }
    return y1;
}

double em_ic0(std::span<const double> d1, std::span<const double> d2) {
    require_equal_lengths(d1, d2, "em_ic0");
    return em_kloeden(d1, d2, 0.0);
}

double milstein_l0(std::span<const double> d1, std::span<const double> d2) {
    require_equal_lengths(d1, d2, "milstein_l0");
    double y1 = 0.0;
    double y2 = 0.0;
    for (std::size_t k = 0; k < d1.size(); ++k) {
        y1 += y2 * d1[k] + 0.5 * d1[k] * d2[k];
        y2 += d2[k];
    }
    return y1;
}

IntegralPair subdivision_pair(MethodKind kind, std::span<const double> d1, std::span<const double> d2,
                              double w1_start, double w2_start) {
    switch (kind) {
        case MethodKind::EmKloeden: return {em_kloeden(d2, d1, w1_start), em_kloeden(d1, d2, w2_start)};
        case MethodKind::EmIc0: return {em_ic0(d2, d1), em_ic0(d1, d2)};
        case MethodKind::MilsteinL0: return {milstein_l0(d2, d1), milstein_l0(d1, d2)};
        case MethodKind::LevyFourier: break;
    }
    throw ConfigError("subdivision_pair: levy_fourier is not a subdivision method");
}

IntegralPair reference_oracle(std::span<const double> d1, std::span<const double> d2) {
    return subdivision_pair(MethodKind::MilsteinL0, d1, d2);
}

std::size_t pair_index(std::size_t a, std::size_t b, std::size_t m) {
    // Row-major upper triangle without the diagonal.
    return a * (2 * m - a - 1) / 2 + (b - a - 1);
}

MixedIntegralTable::MixedIntegralTable(std::size_t steps, std::size_t channels)
    : steps_(steps), channels_(channels), pairs_(channels * (channels - 1) / 2), data_(steps * pairs_) {}

MixedIntegralTable build_mixed_integrals(const WienerSegment& steps, const DoubleIntegralMethod& method,
                                         const WienerSegment* sub, const SeedPath& seeds) {
    method.validate();
    const std::size_t m = steps.channels();
    const std::size_t n_steps = steps.steps();
    MixedIntegralTable table(n_steps, m);
    if (m < 2) return table;
    const double delta = steps.grid().delta();

    const bool reads_sub = method.is_subdivision() || method.coupling == FourierCoupling::Path;
    std::size_t n_k = method.is_subdivision() ? method.resolution : 0;
    if (sub != nullptr && reads_sub) {
        if (sub->channels() != m || sub->steps() % n_steps != 0 || sub->grid().t0() != steps.grid().t0() ||
            sub->grid().t_end() != steps.grid().t_end())
            throw GridMismatchError("mixed integrals: subdivision segment does not align with the step grid");
        const std::size_t have = sub->steps() / n_steps;
        if (method.is_subdivision() && have != n_k)
            throw GridMismatchError("mixed integrals: subdivision has " + std::to_string(have) +
                                    " sub-steps per step, method wants " + std::to_string(n_k));
        n_k = have;
    } else if (method.kind == MethodKind::LevyFourier && method.coupling == FourierCoupling::Path) {
        throw ConfigError("levy_fourier with path coupling needs a subdivision segment");
    }

    std::vector<std::vector<double>> w_start;
    if (method.kind == MethodKind::EmKloeden)
        for (std::size_t c = 0; c < m; ++c) w_start.push_back(steps.cumulative(c));

    std::vector<double> dw(m);
    std::vector<std::vector<double>> local;
    for (std::size_t n = 0; n < n_steps; ++n) {
        for (std::size_t c = 0; c < m; ++c) dw[c] = steps.increment(c, n);
        if (method.is_subdivision() && sub == nullptr)
            local = subdivide_interval(dw, n_k, delta / static_cast<double>(n_k), seeds.with_node(n));
        auto slice = [&](std::size_t c) -> std::span<const double> {
            if (sub != nullptr) return sub->channel(c).subspan(n * n_k, n_k);
            return local[c];
        };
        for (std::size_t a = 0; a + 1 < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                IntegralPair& out = table.pair(n, a, b);
                if (method.is_subdivision()) {
                    const double wa = w_start.empty() ? 0.0 : w_start[a][n];
                    const double wb = w_start.empty() ? 0.0 : w_start[b][n];
                    out = subdivision_pair(method.kind, slice(a), slice(b), wa, wb);
                } else if (method.coupling == FourierCoupling::Path) {
                    out = levy_fourier(dw[a], dw[b], delta,
                                       bridge_fourier_aux(slice(a), slice(b), delta, method.resolution));
                } else {
                    const auto q = static_cast<std::uint32_t>(pair_index(a, b, m));
                    NormalStream rng(seeds.with_channel(kAuxChannelBase + q).with_node(n));
                    out = levy_fourier(dw[a], dw[b], delta, method.resolution, rng);
                }
            }
        }
    }
    return table;
}

}  // namespace itosim::iterint
