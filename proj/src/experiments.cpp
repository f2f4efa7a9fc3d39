#include "itosim/experiments.hpp"

#include <cmath>
#include <string>

#include "itosim/error.hpp"
#include "itosim/wiener.hpp"

namespace itosim::experiments {

namespace {

void check_options(const RunOptions& opts) {
    if (opts.samples == 0) throw ConfigError("experiment: samples must be >= 1");
    if (opts.workers < 1) throw ConfigError("experiment: workers must be >= 1");
}

// Column sums of a [samples][width] table, accumulated in sample order.
std::vector<double> column_means(const std::vector<double>& rows, std::size_t samples, std::size_t width) {
    std::vector<double> sum(width, 0.0);
    for (std::size_t i = 0; i < samples; ++i)
        for (std::size_t c = 0; c < width; ++c) sum[c] += rows[i * width + c];
    for (double& s : sum) s /= static_cast<double>(samples);
    return sum;
}

std::vector<std::size_t> powers_of_two(std::size_t max_log2) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= max_log2; ++k) out.push_back(std::size_t{1} << k);
    return out;
}

// One step's sub-increments for both channels as a two-channel segment.
WienerSegment one_step(const std::vector<std::vector<double>>& parts, double t0, double t1) {
    std::vector<double> data = parts[0];
    data.insert(data.end(), parts[1].begin(), parts[1].end());
    return WienerSegment(TimeGrid(t0, t1, parts[0].size()), 2, std::move(data));
}

}  // namespace

PairingErrors pairing_errors(double delta, std::size_t intervals, std::size_t max_log2, const RunOptions& opts) {
    check_options(opts);
    if (!(delta > 0.0) || intervals == 0 || max_log2 == 0) throw ConfigError("pairing_errors: bad grid");
    PairingErrors out;
    out.delta = delta;
    out.intervals = intervals;
    out.n_k = powers_of_two(max_log2);
    const std::size_t finest = std::size_t{1} << max_log2;
    const std::size_t width = out.n_k.size() * intervals;
    std::vector<double> kloeden(opts.samples * width);
    std::vector<double> ic0(opts.samples * width);

    const TimeGrid grid(0.0, delta * static_cast<double>(intervals), intervals * finest);
    for_each_index(opts.samples, opts.exec, opts.workers, [&](std::size_t i) {
        const WienerSegment fine = generate_segment(SeedPath{opts.seed, i, 0, 0, 0}, 2, grid);
        const WienerSegment steps = coarsen(fine, finest);
        const std::vector<double> w1 = steps.cumulative(0);
        const std::vector<double> w2 = steps.cumulative(1);
        for (std::size_t k = 0; k < out.n_k.size(); ++k) {
            const std::size_t n_k = out.n_k[k];
            const WienerSegment sub = coarsen(fine, finest / n_k);
            for (std::size_t n = 0; n < intervals; ++n) {
                const auto d1 = sub.channel(0).subspan(n * n_k, n_k);
                const auto d2 = sub.channel(1).subspan(n * n_k, n_k);
                const double product = steps.increment(0, n) * steps.increment(1, n);
                const iterint::IntegralPair kl =
                    iterint::subdivision_pair(iterint::MethodKind::EmKloeden, d1, d2, w1[n], w2[n]);
                const iterint::IntegralPair ic = iterint::subdivision_pair(iterint::MethodKind::EmIc0, d1, d2);
                kloeden[i * width + k * intervals + n] = std::abs(product - (kl.i21 + kl.i12));
                ic0[i * width + k * intervals + n] = std::abs(product - (ic.i21 + ic.i12));
            }
        }
    });
    out.kloeden = column_means(kloeden, opts.samples, width);
    out.ic0 = column_means(ic0, opts.samples, width);
    return out;
}

LastIntervalErrors last_interval_errors(double delta, std::size_t steps, std::size_t max_log2,
                                        std::size_t oracle_factor, const RunOptions& opts) {
    check_options(opts);
    if (!(delta > 0.0) || steps == 0 || max_log2 == 0 || oracle_factor < 64)
        throw ConfigError("last_interval_errors: bad grid or oracle factor below 64");
    LastIntervalErrors out;
    out.delta = delta;
    out.n_k = powers_of_two(max_log2);
    const std::size_t oracle_steps = (std::size_t{1} << max_log2) * oracle_factor;
    const std::size_t levels = out.n_k.size();
    const std::size_t width = 4 * levels;
    std::vector<double> rows(opts.samples * width);

    const TimeGrid grid(0.0, delta * static_cast<double>(steps), steps);
    const std::size_t last = steps - 1;
    for_each_index(opts.samples, opts.exec, opts.workers, [&](std::size_t i) {
        const SeedPath root{opts.seed, i, 0, 0, 0};
        const WienerSegment seg = generate_segment(root, 2, grid);
        const double dw[2] = {seg.increment(0, last), seg.increment(1, last)};
        const double w2 = seg.cumulative(1)[last];
        const WienerSegment fine =
            one_step(subdivide_interval(dw, oracle_steps, delta / static_cast<double>(oracle_steps),
                                        root.with_level(1).with_node(last)),
                     grid.node(last), grid.t_end());
        const double truth = iterint::reference_oracle(fine.channel(0), fine.channel(1)).i21;
        double* row = rows.data() + i * width;
        for (std::size_t k = 0; k < levels; ++k) {
            const std::size_t n_k = out.n_k[k];
            const WienerSegment sub = coarsen(fine, oracle_steps / n_k);
            NormalStream rng(root.with_channel(kAuxChannelBase).with_level(static_cast<std::uint32_t>(k + 1)).with_node(last));
            row[k] = std::abs(iterint::levy_fourier(dw[0], dw[1], delta, n_k, rng).i21 - truth);
            row[levels + k] = std::abs(iterint::em_kloeden(sub.channel(0), sub.channel(1), w2) - truth);
            row[2 * levels + k] = std::abs(iterint::em_ic0(sub.channel(0), sub.channel(1)) - truth);
            row[3 * levels + k] = std::abs(iterint::milstein_l0(sub.channel(0), sub.channel(1)) - truth);
        }
    });
    const std::vector<double> mean = column_means(rows, opts.samples, width);
    auto slice = [&](std::size_t block) {
        return std::vector<double>(mean.begin() + static_cast<std::ptrdiff_t>(block * levels),
                                   mean.begin() + static_cast<std::ptrdiff_t>((block + 1) * levels));
    };
    out.levy_fourier = slice(0);
    out.em_kloeden = slice(1);
    out.em_ic0 = slice(2);
    out.milstein_l0 = slice(3);
    return out;
}

SubdivisionMse subdivision_mse(double delta, const std::vector<std::size_t>& n_k, std::size_t oracle_steps,
                               const RunOptions& opts) {
    check_options(opts);
    if (!(delta > 0.0) || n_k.empty()) throw ConfigError("subdivision_mse: bad grid");
    for (std::size_t n : n_k)
        if (n == 0 || oracle_steps % n != 0)
            throw GridMismatchError("subdivision_mse: n_K=" + std::to_string(n) + " does not divide the oracle grid");
    SubdivisionMse out;
    out.delta = delta;
    out.oracle_steps = oracle_steps;
    out.n_k = n_k;
    const std::size_t levels = n_k.size();
    const std::size_t width = 2 * levels;
    std::vector<double> rows(opts.samples * width);

    const TimeGrid grid(0.0, delta, 1);
    for_each_index(opts.samples, opts.exec, opts.workers, [&](std::size_t i) {
        const SeedPath root{opts.seed, i, 0, 0, 0};
        const WienerSegment seg = generate_segment(root, 2, grid);
        const double dw[2] = {seg.increment(0, 0), seg.increment(1, 0)};
        const WienerSegment fine = one_step(
            subdivide_interval(dw, oracle_steps, delta / static_cast<double>(oracle_steps), root.with_level(1)), 0.0,
            delta);
        const double truth = iterint::reference_oracle(fine.channel(0), fine.channel(1)).i21;
        double* row = rows.data() + i * width;
        for (std::size_t k = 0; k < levels; ++k) {
            const WienerSegment sub = coarsen(fine, oracle_steps / n_k[k]);
            const double e_ic0 = iterint::em_ic0(sub.channel(0), sub.channel(1)) - truth;
            const double e_l0 = iterint::milstein_l0(sub.channel(0), sub.channel(1)) - truth;
            row[k] = e_ic0 * e_ic0;
            row[levels + k] = e_l0 * e_l0;
        }
    });
    const std::vector<double> mean = column_means(rows, opts.samples, width);
    out.em_ic0.assign(mean.begin(), mean.begin() + static_cast<std::ptrdiff_t>(levels));
    out.milstein_l0.assign(mean.begin() + static_cast<std::ptrdiff_t>(levels), mean.end());
    return out;
}

LevyFourierMse levy_fourier_mse(double delta, const std::vector<std::size_t>& p, std::size_t fine_steps,
                                const RunOptions& opts) {
    check_options(opts);
    if (!(delta > 0.0) || p.empty()) throw ConfigError("levy_fourier_mse: bad grid");
    LevyFourierMse out;
    out.delta = delta;
    out.fine_steps = fine_steps;
    out.p = p;
    const std::size_t width = p.size();
    std::vector<double> rows(opts.samples * width);

    const TimeGrid grid(0.0, delta, fine_steps);
    for_each_index(opts.samples, opts.exec, opts.workers, [&](std::size_t i) {
        const WienerSegment fine = generate_segment(SeedPath{opts.seed, i, 0, 0, 0}, 2, grid);
        const double truth = iterint::reference_oracle(fine.channel(0), fine.channel(1)).i12;
        const double dw1 = fine.total(0);
        const double dw2 = fine.total(1);
        for (std::size_t k = 0; k < width; ++k) {
            const iterint::FourierAux aux = iterint::bridge_fourier_aux(fine.channel(0), fine.channel(1), delta, p[k]);
            const double e = iterint::levy_fourier(dw1, dw2, delta, aux).i12 - truth;
            rows[i * width + k] = e * e;
        }
    });
    out.mse = column_means(rows, opts.samples, width);
    return out;
}

}  // namespace itosim::experiments
