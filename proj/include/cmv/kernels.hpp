#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cmv/measure.hpp"

namespace cmv {

/// Gaussian kernels on the half-line with variance parameter delta:
///
///   absorbing  G(x0,x)  = phi_d(x0 - x) - phi_d(x0 + x)
///   reflecting Gr(x0,x) = phi_d(x0 - x) + phi_d(x0 + x)
///   remainder  R(x0,x)  = phi_d(x0 + x)
///
/// where phi_d(y) = (2 pi delta)^{-1/2} exp(-y^2 / (2 delta)). Hence Gr - G = 2R.
enum class KernelKind { absorbing, reflecting, remainder };

inline constexpr int kMaxKernelDerivative = 6;

/// Throws std::domain_error for delta <= 0.
double kernel_eval(KernelKind kind, double delta, double x0, double x);

/// n-th derivative in x of the kernel, 0 <= n <= 6 (std::domain_error otherwise).
double kernel_derivative(KernelKind kind, double delta, int n, double x0, double x);

/// Probabilists' Hermite polynomial He_n(u).
double hermite_he(int n, double u);

/// Atoms with weights.
struct WeightedPoints {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Absolutely continuous measure h(x) dx on [knots.front(), knots.back()].
/// Knots mark where h or its derivatives may be non-smooth; each knot
/// interval is integrated with 32-point Gauss-Legendre panels.
struct DensityFunction {
    std::function<double(double)> h;
    std::vector<double> knots;
};

/// T mu(x) = integral of K(x0, x) mu(dx0) at each x in xs.
///
/// Point sets are summed exactly (atoms further than 12 sqrt(delta) away are
/// skipped); piecewise-linear CDF measures are integrated in closed form with
/// the normal CDF; density functions use Gauss-Legendre.
std::vector<double> smooth(const Measure1D& mu, double delta, KernelKind kind, std::span<const double> xs);
std::vector<double> smooth(const WeightedPoints& mu, double delta, KernelKind kind, std::span<const double> xs);
std::vector<double> smooth(const DensityFunction& mu, double delta, KernelKind kind, std::span<const double> xs);

/// n-th x-derivative of T mu via the analytic kernel derivative.
std::vector<double> smooth_derivative(const Measure1D& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind = KernelKind::absorbing);
std::vector<double> smooth_derivative(const WeightedPoints& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind = KernelKind::absorbing);
std::vector<double> smooth_derivative(const DensityFunction& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind = KernelKind::absorbing);

template <typename Mu>
std::vector<double> remainder_eval(const Mu& mu, double delta, std::span<const double> xs) {
    return smooth(mu, delta, KernelKind::remainder, xs);
}

/// Integral of g over [a, b] with 32-point Gauss-Legendre on panels no wider
/// than max_panel.
double gauss_legendre(const std::function<double(double)>& g, double a, double b, double max_panel);

}  // namespace cmv
