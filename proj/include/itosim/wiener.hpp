#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "itosim/rng.hpp"
#include "itosim/time_grid.hpp"

namespace itosim {

/// Increments of an m-channel Wiener process on a uniform grid.
///
/// Storage is channel-major: increment n of channel c lives at c * N + n.
class WienerSegment {
public:
    WienerSegment(TimeGrid grid, std::size_t channels);
    WienerSegment(TimeGrid grid, std::size_t channels, std::vector<double> increments);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t steps() const noexcept { return grid_.steps(); }

    std::span<const double> channel(std::size_t c) const {
        return {increments_.data() + c * steps(), steps()};
    }
    std::span<double> channel(std::size_t c) { return {increments_.data() + c * steps(), steps()}; }
    double increment(std::size_t c, std::size_t n) const { return increments_[c * steps() + n]; }
    const std::vector<double>& data() const noexcept { return increments_; }

    /// Running values W_{t_n}, n = 0..N, with W_{t0} = 0 (left-to-right sums).
    std::vector<double> cumulative(std::size_t c) const;
    /// W_T - W_{t0} for one channel.
    double total(std::size_t c) const;

    friend bool operator==(const WienerSegment&, const WienerSegment&) = default;

private:
    TimeGrid grid_;
    std::size_t channels_;
    std::vector<double> increments_;
};

/// I.i.d. N(0, delta) increments; channel c draws from seeds.with_channel(c).
WienerSegment generate_segment(const SeedPath& seeds, std::size_t channels, const TimeGrid& grid);

/// Block sums of `factor` consecutive increments, summed left to right.
WienerSegment coarsen(const WienerSegment& seg, std::size_t factor);

/// Splits each increment into `factor` Brownian-bridge sub-increments.
/// Increment n of channel c draws from seeds.with_channel(c).with_node(n);
/// seeds.level is used as given.
WienerSegment refine_bridge(const WienerSegment& seg, std::size_t factor, const SeedPath& seeds);

/// Conditional split of one increment: draws z_k ~ N(0, sub_delta) and
/// writes z_k - (sum z - dw) / out.size(), which has the bridge law given dw.
void bridge_split(double dw, double sub_delta, NormalStream& rng, std::span<double> out);

/// Per-channel sub-increments of one parent step; channel c draws from
/// seeds.with_channel(c). delta * n_k must match the parent step.
std::vector<std::vector<double>> subdivide_interval(std::span<const double> dw, std::size_t n_k,
                                                    double delta, const SeedPath& seeds);

/// Lazily refined Brownian paths for one replicate.
///
/// Level 0 is generated i.i.d. on the root grid (seed level 0); level l is
/// refine_bridge(level(l - 1), factor) with seed level l. Level l therefore
/// depends only on the root seeds, never on how deep the caller goes.
class WienerHierarchy {
public:
    WienerHierarchy(const SeedPath& root, std::size_t channels, TimeGrid root_grid, std::size_t factor);

    const WienerSegment& level(std::size_t l);
    std::size_t factor() const noexcept { return factor_; }
    const TimeGrid& root_grid() const noexcept { return root_grid_; }
    /// Smallest l with root steps * factor^l == steps, or -1.
    int level_for_steps(std::size_t steps) const;

private:
    SeedPath root_;
    std::size_t channels_;
    TimeGrid root_grid_;
    std::size_t factor_;
    std::vector<WienerSegment> levels_;
};

/// CSV dump: header `channel,step,increment`.
void write_csv(std::ostream& os, const WienerSegment& seg);

}  // namespace itosim
