#pragma once

#include <cstddef>

namespace itosim {

/// Uniform grid t_n = t0 + n (T - t0) / N on [t0, T].
class TimeGrid {
public:
    TimeGrid(double t0, double t_end, std::size_t steps);

    double t0() const noexcept { return t0_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t steps() const noexcept { return steps_; }
    double delta() const noexcept { return (t_end_ - t0_) / static_cast<double>(steps_); }
    double node(std::size_t n) const noexcept {
        return t0_ + (t_end_ - t0_) * static_cast<double>(n) / static_cast<double>(steps_);
    }

    /// Same interval, steps * factor steps.
    TimeGrid refined(std::size_t factor) const;
    /// Same interval, steps / factor steps. Throws GridMismatchError unless factor divides steps.
    TimeGrid coarsened(std::size_t factor) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t0_;
    double t_end_;
    std::size_t steps_;
};

}  // namespace itosim
