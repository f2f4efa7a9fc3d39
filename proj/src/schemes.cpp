#include "itosim/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "itosim/error.hpp"

namespace itosim {

void ScalarSde::validate() const {
    if (!drift || !diffusion || !milstein_term) throw ConfigError("scalar SDE: missing coefficient function");
}

void MultiSde::validate() const {
    if (d == 0 || m == 0) throw ConfigError("SDE dimensions must be >= 1");
    if (!drift || !diffusion) throw ConfigError("SDE: missing drift or diffusion");
    for (const MilsteinTerm& term : milstein) {
        if (term.j1 >= m || term.j2 >= m) throw ConfigError("SDE: Milstein term channel out of range");
        if (!term.fn) throw ConfigError("SDE: Milstein term without a function");
    }
    if (noise == NoiseStructure::Diagonal && d != m) throw ConfigError("diagonal noise requires d == m");
}

std::size_t PathResult::flagged_steps() const {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

namespace {

enum class Offdiag { Table, Half, Skip, DiagonalOnly };

PathResult start_path(const WienerSegment& seg, std::size_t dim, std::span<const double> x0) {
    PathResult result{seg.grid(), dim, std::vector<double>((seg.steps() + 1) * dim), {}};
    std::copy(x0.begin(), x0.end(), result.states.begin());
    return result;
}

void check_finite(std::span<const double> x, std::size_t step) {
    for (double v : x)
        if (!std::isfinite(v)) throw DivergenceError(step, "non-finite state");
}

class MultiStepper {
public:
    MultiStepper(const MultiSde& sde, Offdiag mode) : sde_(sde), mode_(mode), a_(sde.d), b_(sde.d * sde.m), lb_(sde.d) {
        sde.validate();
        order_.resize(sde.milstein.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t l, std::size_t r) {
            const MilsteinTerm& x = sde.milstein[l];
            const MilsteinTerm& y = sde.milstein[r];
            return x.j1 != y.j1 ? x.j1 < y.j1 : x.j2 < y.j2;
        });
    }

    // `integral(j1, j2)` is only called for j1 != j2 in Table mode.
    template <class Integral>
    void step(double t, double delta, std::span<const double> x, std::span<const double> dw, bool milstein,
              Integral&& integral, std::span<double> out) {
        const std::size_t d = sde_.d;
        const std::size_t m = sde_.m;
        sde_.drift(t, x, a_);
        sde_.diffusion(t, x, b_);
        for (std::size_t i = 0; i < d; ++i) {
            double v = x[i] + a_[i] * delta;
            if (milstein && mode_ == Offdiag::DiagonalOnly) {
                v += b_[i * m + i] * dw[i];
            } else {
                for (std::size_t j = 0; j < m; ++j) v += b_[i * m + j] * dw[j];
            }
            out[i] = v;
        }
        if (!milstein || mode_ == Offdiag::Skip) return;
        for (std::size_t idx : order_) {
            const MilsteinTerm& term = sde_.milstein[idx];
            if (term.j1 == term.j2) {
                term.fn(t, x, lb_);
                const double ijj = iterint::diagonal_exact(dw[term.j1], delta);
                if (mode_ == Offdiag::DiagonalOnly) {
                    out[term.j1] += lb_[term.j1] * ijj;
                } else {
                    for (std::size_t i = 0; i < d; ++i) out[i] += lb_[i] * ijj;
                }
                continue;
            }
            if (mode_ == Offdiag::DiagonalOnly) continue;
            term.fn(t, x, lb_);
            const double i12 = mode_ == Offdiag::Half ? 0.5 * dw[term.j1] * dw[term.j2] : integral(term.j1, term.j2);
            for (std::size_t i = 0; i < d; ++i) out[i] += lb_[i] * i12;
        }
    }

private:
    const MultiSde& sde_;
    Offdiag mode_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> lb_;
    std::vector<std::size_t> order_;
};

Offdiag mode_for(NoiseStructure noise) {
    switch (noise) {
        case NoiseStructure::General: return Offdiag::Table;
        case NoiseStructure::Commutative: return Offdiag::Half;
        case NoiseStructure::Diagonal: return Offdiag::DiagonalOnly;
        case NoiseStructure::Additive: return Offdiag::Skip;
    }
    return Offdiag::Table;
}

PathResult run_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg, bool milstein,
                  const iterint::MixedIntegralTable* table) {
    sde.validate();
    if (x0.size() != sde.d) throw ConfigError("initial state has " + std::to_string(x0.size()) + " entries, SDE has d=" +
                                              std::to_string(sde.d));
    if (seg.channels() != sde.m)
        throw ConfigError("Wiener segment has " + std::to_string(seg.channels()) + " channels, SDE has m=" +
                          std::to_string(sde.m));
    const Offdiag mode = mode_for(sde.noise);
    if (milstein && mode == Offdiag::Table && sde.m >= 2) {
        if (table == nullptr) throw ConfigError("general noise needs a double-integral method");
        if (table->steps() != seg.steps() || table->channels() != seg.channels())
            throw GridMismatchError("double-integral table does not match the Wiener segment");
    }
    MultiStepper stepper(sde, mode);
    PathResult result = start_path(seg, sde.d, x0);
    if (sde.flag) result.flags.assign(seg.steps(), 0);
    const TimeGrid& grid = seg.grid();
    const double delta = grid.delta();
    std::vector<double> dw(sde.m);
    for (std::size_t n = 0; n < seg.steps(); ++n) {
        for (std::size_t j = 0; j < sde.m; ++j) dw[j] = seg.increment(j, n);
        const double t = grid.node(n);
        std::span<const double> x = result.state(n);
        std::span<double> out(result.states.data() + (n + 1) * sde.d, sde.d);
        if (sde.flag && sde.flag(t, x)) result.flags[n] = 1;
        stepper.step(t, delta, x, dw, milstein,
                     [&](std::size_t j1, std::size_t j2) { return table->integral(n, j1, j2); }, out);
        check_finite(out, n);
    }
    return result;
}

template <bool Milstein>
PathResult run_scalar(const ScalarSde& sde, double x0, const WienerSegment& seg) {
    sde.validate();
    if (seg.channels() != 1) throw ConfigError("scalar scheme needs a one-channel Wiener segment");
    const double x0v[1] = {x0};
    PathResult result = start_path(seg, 1, x0v);
    const TimeGrid& grid = seg.grid();
    const double delta = grid.delta();
    double x = x0;
    for (std::size_t n = 0; n < seg.steps(); ++n) {
        const double t = grid.node(n);
        const double dw = seg.increment(0, n);
        double next = x + sde.drift(t, x) * delta + sde.diffusion(t, x) * dw;
        if constexpr (Milstein) next += sde.milstein_term(t, x) * iterint::diagonal_exact(dw, delta);
        if (!std::isfinite(next)) throw DivergenceError(n, "non-finite state");
        x = next;
        result.states[n + 1] = x;
    }
    return result;
}

}  // namespace

PathResult euler_scalar(const ScalarSde& sde, double x0, const WienerSegment& seg) {
    return run_scalar<false>(sde, x0, seg);
}

PathResult milstein_scalar(const ScalarSde& sde, double x0, const WienerSegment& seg) {
    return run_scalar<true>(sde, x0, seg);
}

PathResult euler_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg) {
    return run_md(sde, x0, seg, false, nullptr);
}

PathResult milstein_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg,
                       const iterint::MixedIntegralTable* table) {
    return run_md(sde, x0, seg, true, table);
}

PathResult milstein_md(const MultiSde& sde, std::span<const double> x0, const WienerSegment& seg,
                       const iterint::DoubleIntegralMethod& method, const WienerSegment* sub,
                       const SeedPath& seeds) {
    if (sde.noise != NoiseStructure::General || sde.m < 2) return run_md(sde, x0, seg, true, nullptr);
    const iterint::MixedIntegralTable table = iterint::build_mixed_integrals(seg, method, sub, seeds);
    return run_md(sde, x0, seg, true, &table);
}

void milstein_commutative_step(const MultiSde& sde, double t, double delta, std::span<const double> x,
                               std::span<const double> dw, std::span<double> out) {
    if (sde.noise != NoiseStructure::Commutative) throw ConfigError("commutative step on a non-commutative SDE");
    if (x.size() != sde.d || out.size() != sde.d || dw.size() != sde.m) throw ConfigError("step: dimension mismatch");
    MultiStepper stepper(sde, Offdiag::Half);
    stepper.step(t, delta, x, dw, true, [](std::size_t, std::size_t) { return 0.0; }, out);
}

void milstein_diagonal_step(const MultiSde& sde, double t, double delta, std::span<const double> x,
                            std::span<const double> dw, std::span<double> out) {
    if (sde.noise != NoiseStructure::Diagonal) throw ConfigError("diagonal step on a non-diagonal SDE");
    if (x.size() != sde.d || out.size() != sde.d || dw.size() != sde.m) throw ConfigError("step: dimension mismatch");
    MultiStepper stepper(sde, Offdiag::DiagonalOnly);
    stepper.step(t, delta, x, dw, true, [](std::size_t, std::size_t) { return 0.0; }, out);
}

}  // namespace itosim
