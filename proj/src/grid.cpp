#include "cmv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmv {

TimeGrid::TimeGrid(double horizon, double dt) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid: horizon must be > 0");
    if (!(dt > 0.0) || dt > horizon)
        throw std::invalid_argument("time grid: dt must be in (0, T]");
    const double ratio = horizon / dt;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("time grid: T/dt = " + std::to_string(ratio) + " is not an integer");
    horizon_ = horizon;
    n_steps_ = static_cast<std::size_t>(n);
    dt_ = horizon / n;
}

std::size_t TimeGrid::index_of(double t) const {
    if (t <= 0.0) return 0;
    const double k = std::round(t / dt_);
    if (k >= static_cast<double>(n_steps_)) return n_steps_;
    return static_cast<std::size_t>(k);
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(n_points());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = time(i);
    return out;
}

LossPath::LossPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_points())
        throw std::invalid_argument("loss path: expected " + std::to_string(grid.n_points()) + " values, got " +
                                    std::to_string(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw std::invalid_argument("loss path: value outside [0,1] at index " + std::to_string(i));
        if (i > 0 && values[i] < values[i - 1])
            throw std::invalid_argument("loss path: decreasing at index " + std::to_string(i));
    }
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace cmv
