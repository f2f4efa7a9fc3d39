#include "itosim/time_grid.hpp"

#include <cmath>
#include <string>

#include "itosim/error.hpp"

namespace itosim {

TimeGrid::TimeGrid(double t0, double t_end, std::size_t steps) : t0_(t0), t_end_(t_end), steps_(steps) {
    if (steps == 0) throw ConfigError("time grid: step count must be >= 1");
    if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0))
        throw ConfigError("time grid: need finite t0 < T");
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
    if (factor == 0) throw ConfigError("time grid: refinement factor must be >= 1");
    return {t0_, t_end_, steps_ * factor};
}

TimeGrid TimeGrid::coarsened(std::size_t factor) const {
    if (factor == 0 || steps_ % factor != 0)
        throw GridMismatchError("time grid: factor " + std::to_string(factor) + " does not divide " +
                                std::to_string(steps_) + " steps");
    return {t0_, t_end_, steps_ / factor};
}

}  // namespace itosim
