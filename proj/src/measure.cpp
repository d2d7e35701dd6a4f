#include "cmv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmv {

Measure1D::Measure1D(std::vector<double> breakpoints, std::vector<double> cdf)
    : x_(std::move(breakpoints)), cdf_(std::move(cdf)) {
    if (x_.size() < 2) throw std::invalid_argument("measure: need at least two breakpoints");
    if (x_.size() != cdf_.size()) throw std::invalid_argument("measure: breakpoints and cdf differ in length");
    if (!(x_.front() >= 0.0)) throw std::invalid_argument("measure: breakpoints must be >= 0");
    for (std::size_t j = 0; j < x_.size(); ++j) {
        if (!std::isfinite(x_[j]) || !std::isfinite(cdf_[j]))
            throw std::invalid_argument("measure: non-finite value at index " + std::to_string(j));
        if (j > 0 && !(x_[j] > x_[j - 1]))
            throw std::invalid_argument("measure: breakpoints must be strictly increasing");
        if (j > 0 && cdf_[j] < cdf_[j - 1]) throw std::invalid_argument("measure: cdf must be nondecreasing");
    }
    if (cdf_.front() != 0.0) throw std::invalid_argument("measure: atom at the first breakpoint (cdf[0] != 0)");
    const double mass = cdf_.back();
    if (!(mass > 0.0)) throw std::invalid_argument("measure: total mass must be > 0");
    if (mass > 1.0 + 1e-12) throw std::invalid_argument("measure: total mass exceeds 1");
    if (mass > 1.0) cdf_.back() = 1.0;

    slope_.resize(x_.size() - 1);
    for (std::size_t j = 0; j + 1 < x_.size(); ++j) {
        slope_[j] = (cdf_[j + 1] - cdf_[j]) / (x_[j + 1] - x_[j]);
        sup_density_ = std::max(sup_density_, slope_[j]);
    }
}

Measure1D Measure1D::uniform(double a, double b, double mass) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("uniform measure: need 0 <= a < b");
    return Measure1D({a, b}, {0.0, mass});
}

Measure1D Measure1D::from_density(std::vector<double> breakpoints, std::span<const double> densities) {
    if (breakpoints.size() != densities.size() + 1)
        throw std::invalid_argument("measure: need one density value per segment");
    std::vector<double> cdf(breakpoints.size(), 0.0);
    for (std::size_t j = 0; j < densities.size(); ++j) {
        if (!(densities[j] >= 0.0)) throw std::invalid_argument("measure: negative density");
        cdf[j + 1] = cdf[j] + densities[j] * (breakpoints[j + 1] - breakpoints[j]);
    }
    return Measure1D(std::move(breakpoints), std::move(cdf));
}

std::size_t Measure1D::segment_of(double x) const {
    // Index j with x_j <= x < x_{j+1}; caller guarantees x_0 <= x < x_k.
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double Measure1D::cdf(double x) const {
    if (!(x > x_.front())) return 0.0;
    if (x >= x_.back()) return cdf_.back();
    const std::size_t j = segment_of(x);
    const double v = cdf_[j] + (x - x_[j]) * slope_[j];
    return std::clamp(v, cdf_[j], cdf_[j + 1]);
}

double Measure1D::density(double x) const {
    if (x < x_.front() || x >= x_.back()) return 0.0;
    return slope_[segment_of(x)];
}

double Measure1D::quantile(double u) const {
    if (!(u > 0.0)) return x_.front();
    if (u >= cdf_.back()) {
        // First breakpoint where the full mass is reached.
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), cdf_.back());
        return x_[static_cast<std::size_t>(it - cdf_.begin())];
    }
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());  // cdf_[j-1] < u <= cdf_[j]
    const double x = x_[j - 1] + (u - cdf_[j - 1]) / slope_[j - 1];
    return std::clamp(x, x_[j - 1], x_[j]);
}

double Measure1D::interval_mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    return std::max(0.0, cdf(b) - cdf(a));
}

}  // namespace cmv
