#pragma once

#include <span>
#include <vector>

namespace cmv {

/// Finite measure on [0, inf) with a piecewise-linear, continuous CDF.
///
/// The CDF interpolates (x_j, F_j) linearly, is 0 left of x_0 and constant
/// F_k right of x_k. Atoms are not representable: F_0 must be 0. The density
/// is piecewise constant and sup_density() is the largest slope.
class Measure1D {
public:
    /// Throws std::invalid_argument on unsorted/negative breakpoints, a
    /// decreasing CDF, an atom (cdf[0] != 0) or total mass outside (0, 1].
    Measure1D(std::vector<double> breakpoints, std::vector<double> cdf);

    /// Uniform density mass/(b-a) on [a, b].
    static Measure1D uniform(double a, double b, double mass = 1.0);

    /// Piecewise-constant density: densities[j] on [breakpoints[j], breakpoints[j+1]].
    static Measure1D from_density(std::vector<double> breakpoints, std::span<const double> densities);

    double total_mass() const { return cdf_.back(); }
    double sup_density() const { return sup_density_; }
    std::span<const double> breakpoints() const { return x_; }
    std::span<const double> cdf_values() const { return cdf_; }
    std::size_t segments() const { return x_.size() - 1; }
    double slope(std::size_t segment) const { return slope_[segment]; }

    /// F(x). Monotone in floating point: F(a) <= F(b) whenever a <= b.
    double cdf(double x) const;

    /// Right-continuous density at x (0 outside the breakpoint range).
    double density(double x) const;

    /// Generalised inverse inf{x : F(x) >= u} for u in (0, total_mass].
    double quantile(double u) const;

    /// F(b) - F(a) for b > a, clamped at 0; reversed or empty intervals give 0.
    double interval_mass(double a, double b) const;

private:
    std::size_t segment_of(double x) const;

    std::vector<double> x_;
    std::vector<double> cdf_;
    std::vector<double> slope_;
    double sup_density_ = 0.0;
};

inline double interval_mass(const Measure1D& mu, double a, double b) { return mu.interval_mass(a, b); }

}  // namespace cmv
