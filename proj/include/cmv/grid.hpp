#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cmv {

/// Uniform time grid t_i = i * dt on [0, T].
class TimeGrid {
public:
    /// Throws std::invalid_argument unless T > 0, dt > 0 and T/dt is an
    /// integer up to a relative 1e-9.
    TimeGrid(double horizon, double dt);

    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_points() const { return n_steps_ + 1; }

    /// The last point is exactly T.
    double time(std::size_t i) const { return i == n_steps_ ? horizon_ : static_cast<double>(i) * dt_; }

    /// Grid index closest to t, clamped to [0, n_steps].
    std::size_t index_of(double t) const;

    std::vector<double> times() const;

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    double dt_;
    std::size_t n_steps_;
};

/// Nondecreasing step function L on a TimeGrid with values in [0,1].
struct LossPath {
    LossPath(TimeGrid grid, std::vector<double> values);

    TimeGrid grid;
    std::vector<double> values;

    double at(std::size_t i) const { return values[i]; }
    double terminal() const { return values.back(); }
};

/// Sup-norm distance over the first min(|a|,|b|) entries.
double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace cmv
