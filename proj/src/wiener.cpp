#include "itosim/wiener.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "itosim/csv.hpp"
#include "itosim/error.hpp"

namespace itosim {

WienerSegment::WienerSegment(TimeGrid grid, std::size_t channels)
    : grid_(grid), channels_(channels), increments_(channels * grid.steps(), 0.0) {
    if (channels == 0) throw ConfigError("wiener segment: need at least one channel");
}

WienerSegment::WienerSegment(TimeGrid grid, std::size_t channels, std::vector<double> increments)
    : grid_(grid), channels_(channels), increments_(std::move(increments)) {
    if (channels == 0) throw ConfigError("wiener segment: need at least one channel");
    if (increments_.size() != channels * grid.steps())
        throw ConfigError("wiener segment: expected " + std::to_string(channels * grid.steps()) +
                          " increments, got " + std::to_string(increments_.size()));
}

std::vector<double> WienerSegment::cumulative(std::size_t c) const {
    std::vector<double> w(steps() + 1);
    w[0] = 0.0;
    const auto inc = channel(c);
    for (std::size_t n = 0; n < inc.size(); ++n) w[n + 1] = w[n] + inc[n];
    return w;
}

double WienerSegment::total(std::size_t c) const {
    double s = 0.0;
    for (double v : channel(c)) s += v;
    return s;
}

WienerSegment generate_segment(const SeedPath& seeds, std::size_t channels, const TimeGrid& grid) {
    WienerSegment seg(grid, channels);
    const double scale = std::sqrt(grid.delta());
    for (std::size_t c = 0; c < channels; ++c) {
        NormalStream rng(seeds.with_channel(static_cast<std::uint32_t>(c)));
        rng.fill(seg.channel(c), scale);
    }
    return seg;
}

WienerSegment coarsen(const WienerSegment& seg, std::size_t factor) {
    const TimeGrid grid = seg.grid().coarsened(factor);
    WienerSegment out(grid, seg.channels());
    for (std::size_t c = 0; c < seg.channels(); ++c) {
        const auto in = seg.channel(c);
        auto dst = out.channel(c);
        for (std::size_t n = 0; n < dst.size(); ++n) {
            double s = 0.0;
            for (std::size_t j = 0; j < factor; ++j) s += in[n * factor + j];
            dst[n] = s;
        }
    }
    return out;
}

void bridge_split(double dw, double sub_delta, NormalStream& rng, std::span<double> out) {
    const std::size_t k = out.size();
    if (k == 0) throw ConfigError("bridge split: need at least one sub-increment");
    if (k == 1) {
        out[0] = dw;
        return;
    }
    rng.fill(out, std::sqrt(sub_delta));
    double sum = 0.0;
    for (double z : out) sum += z;
    const double shift = (sum - dw) / static_cast<double>(k);
    for (double& z : out) z -= shift;
}

WienerSegment refine_bridge(const WienerSegment& seg, std::size_t factor, const SeedPath& seeds) {
    if (factor == 0) throw ConfigError("refine_bridge: factor must be >= 1");
    if (factor == 1) return seg;
    const TimeGrid grid = seg.grid().refined(factor);
    const double sub_delta = grid.delta();
    WienerSegment out(grid, seg.channels());
    for (std::size_t c = 0; c < seg.channels(); ++c) {
        const auto in = seg.channel(c);
        auto dst = out.channel(c);
        const SeedPath ch = seeds.with_channel(static_cast<std::uint32_t>(c));
        for (std::size_t n = 0; n < in.size(); ++n) {
            NormalStream rng(ch.with_node(n));
            bridge_split(in[n], sub_delta, rng, dst.subspan(n * factor, factor));
        }
    }
    return out;
}

std::vector<std::vector<double>> subdivide_interval(std::span<const double> dw, std::size_t n_k, double delta,
                                                    const SeedPath& seeds) {
    if (n_k == 0) throw ConfigError("subdivide_interval: n_K must be >= 1");
    if (!(delta > 0.0)) throw ConfigError("subdivide_interval: sub-step must be positive");
    std::vector<std::vector<double>> out(dw.size(), std::vector<double>(n_k));
    for (std::size_t c = 0; c < dw.size(); ++c) {
        NormalStream rng(seeds.with_channel(static_cast<std::uint32_t>(c)));
        bridge_split(dw[c], delta, rng, out[c]);
    }
    return out;
}

WienerHierarchy::WienerHierarchy(const SeedPath& root, std::size_t channels, TimeGrid root_grid,
                                 std::size_t factor)
    : root_(root), channels_(channels), root_grid_(root_grid), factor_(factor) {
    if (factor < 2) throw ConfigError("wiener hierarchy: refinement factor must be >= 2");
    if (channels == 0) throw ConfigError("wiener hierarchy: need at least one channel");
}

const WienerSegment& WienerHierarchy::level(std::size_t l) {
    if (levels_.empty()) levels_.push_back(generate_segment(root_.with_level(0), channels_, root_grid_));
    while (levels_.size() <= l) {
        const auto next = static_cast<std::uint32_t>(levels_.size());
        WienerSegment refined = refine_bridge(levels_.back(), factor_, root_.with_level(next));
        levels_.push_back(std::move(refined));
    }
    return levels_[l];
}

int WienerHierarchy::level_for_steps(std::size_t steps) const {
    std::size_t n = root_grid_.steps();
    for (int l = 0; n <= steps; ++l, n *= factor_) {
        if (n == steps) return l;
    }
    return -1;
}

void write_csv(std::ostream& os, const WienerSegment& seg) {
    csv::write_header(os, {"channel", "step", "increment"});
    for (std::size_t c = 0; c < seg.channels(); ++c)
        for (std::size_t n = 0; n < seg.steps(); ++n)
            os << c << ',' << n << ',' << csv::format(seg.increment(c, n)) << '\n';
}

}  // namespace itosim
