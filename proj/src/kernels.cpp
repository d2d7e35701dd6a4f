#include "cmv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

namespace cmv {

namespace {

// Gaussian factors beyond 12 standard deviations are below 1e-31.
constexpr double kWindowSigmas = 12.0;

inline double std_normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

// Phi(hi) - Phi(lo), evaluated in the tail that avoids cancellation.
double normal_mass(double lo, double hi) {
    constexpr double r = std::numbers::sqrt2 / 2.0;
    if (lo >= 0.0) return 0.5 * (std::erfc(lo * r) - std::erfc(hi * r));
    if (hi <= 0.0) return 0.5 * (std::erfc(-hi * r) - std::erfc(-lo * r));
    return 0.5 * (std::erf(hi * r) - std::erf(lo * r));
}

void check_delta(double delta) {
    if (!(delta > 0.0)) throw std::domain_error("kernel: delta must be > 0");
}

void check_order(int n) {
    if (n < 0 || n > kMaxKernelDerivative)
        throw std::domain_error("kernel: derivative order must be in [0, 6]");
}

// Weights of the direct (x0 - x) and mirrored (x0 + x) Gaussians.
std::pair<double, double> term_signs(KernelKind kind) {
    switch (kind) {
        case KernelKind::absorbing: return {1.0, -1.0};
        case KernelKind::reflecting: return {1.0, 1.0};
        case KernelKind::remainder: return {0.0, 1.0};
    }
    return {1.0, -1.0};
}

// Index ranges of sorted atoms that can contribute at x: atoms near x
// (direct term) and atoms near -x (mirrored term).
template <typename F>
void for_each_window(const std::vector<double>& sorted, double x, double w, F&& visit) {
    auto range = [&](double lo, double hi) {
        const auto b = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
        const auto e = std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
        return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(b), static_cast<std::size_t>(e));
    };
    auto [a0, a1] = range(x - w, x + w);
    auto [b0, b1] = range(-x - w, -x + w);
    if (b1 >= a0 && b0 <= a1) {
        for (std::size_t i = std::min(a0, b0); i < std::max(a1, b1); ++i) visit(i);
    } else {
        for (std::size_t i = b0; i < b1; ++i) visit(i);
        for (std::size_t i = a0; i < a1; ++i) visit(i);
    }
}

struct SortedPoints {
    std::vector<double> points;
    std::vector<double> weights;
};

SortedPoints sorted_copy(const WeightedPoints& mu) {
    if (mu.points.size() != mu.weights.size())
        throw std::invalid_argument("weighted points: points and weights differ in length");
    std::vector<std::size_t> order(mu.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu.points[a] < mu.points[b]; });
    SortedPoints s;
    s.points.reserve(order.size());
    s.weights.reserve(order.size());
    for (std::size_t i : order) {
        s.points.push_back(mu.points[i]);
        s.weights.push_back(mu.weights[i]);
    }
    return s;
}

std::vector<double> smooth_points_impl(const WeightedPoints& mu, double delta, int n, KernelKind kind,
                                       std::span<const double> xs) {
    check_delta(delta);
    check_order(n);
    const SortedPoints s = sorted_copy(mu);
    const double w = kWindowSigmas * std::sqrt(delta);
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = xs[k];
        double acc = 0.0;
        for_each_window(s.points, x, w, [&](std::size_t i) {
            acc += s.weights[i] * kernel_derivative(kind, delta, n, s.points[i], x);
        });
        out[k] = acc;
    }
    return out;
}

// n-th x-derivative of the integral over x0 in [a, b] of the direct and
// mirrored Gaussians, in closed form.
std::pair<double, double> segment_terms(double a, double b, double x, double sigma, int n) {
    if (n == 0) return {normal_mass((a - x) / sigma, (b - x) / sigma), normal_mass((a + x) / sigma, (b + x) / sigma)};
    const double scale = std::pow(sigma, -n);
    const double ua = (a - x) / sigma, ub = (b - x) / sigma;
    const double wa = (a + x) / sigma, wb = (b + x) / sigma;
    const double direct = -scale * (hermite_he(n - 1, ub) * std_normal_pdf(ub) - hermite_he(n - 1, ua) * std_normal_pdf(ua));
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;  // (-1)^(n-1)
    const double mirrored =
        scale * sign * (hermite_he(n - 1, wb) * std_normal_pdf(wb) - hermite_he(n - 1, wa) * std_normal_pdf(wa));
    return {direct, mirrored};
}

std::vector<double> smooth_measure_impl(const Measure1D& mu, double delta, int n, KernelKind kind,
                                        std::span<const double> xs) {
    check_delta(delta);
    check_order(n);
    const double sigma = std::sqrt(delta);
    const auto [cd, cm] = term_signs(kind);
    const auto bp = mu.breakpoints();
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < mu.segments(); ++j) {
            const double s = mu.slope(j);
            if (s == 0.0) continue;
            const auto [direct, mirrored] = segment_terms(bp[j], bp[j + 1], xs[k], sigma, n);
            acc += s * (cd * direct + cm * mirrored);
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> smooth_density_impl(const DensityFunction& mu, double delta, int n, KernelKind kind,
                                        std::span<const double> xs) {
    check_delta(delta);
    check_order(n);
    if (mu.knots.size() < 2) throw std::invalid_argument("density function: need at least two knots");
    const double sigma = std::sqrt(delta);
    const double w = kWindowSigmas * sigma;
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = xs[k];
        auto integrand = [&](double x0) { return mu.h(x0) * kernel_derivative(kind, delta, n, x0, x); };
        // Direct window around x and mirrored window around -x, merged when
        // they overlap.
        std::vector<std::pair<double, double>> windows = {{-x - w, -x + w}, {x - w, x + w}};
        std::sort(windows.begin(), windows.end());
        if (windows[1].first <= windows[0].second)
            windows = {{windows[0].first, std::max(windows[0].second, windows[1].second)}};
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < mu.knots.size(); ++j) {
            for (const auto& [wlo, whi] : windows) {
                const double lo = std::max(mu.knots[j], wlo);
                const double hi = std::min(mu.knots[j + 1], whi);
                if (hi > lo) acc += gauss_legendre(integrand, lo, hi, 0.5 * sigma);
            }
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace

double hermite_he(int n, double u) {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = u;
    for (int k = 1; k < n; ++k) {
        const double next = u * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double kernel_eval(KernelKind kind, double delta, double x0, double x) {
    check_delta(delta);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * delta);
    const double direct = std::exp(-(x0 - x) * (x0 - x) / (2.0 * delta));
    const double mirrored = std::exp(-(x0 + x) * (x0 + x) / (2.0 * delta));
    switch (kind) {
        case KernelKind::absorbing: return norm * (direct - mirrored);
        case KernelKind::reflecting: return norm * (direct + mirrored);
        case KernelKind::remainder: return norm * mirrored;
    }
    return 0.0;
}

double kernel_derivative(KernelKind kind, double delta, int n, double x0, double x) {
    check_delta(delta);
    check_order(n);
    if (n == 0) return kernel_eval(kind, delta, x0, x);
    const double sigma = std::sqrt(delta);
    const double u = (x - x0) / sigma;
    const double v = (x + x0) / sigma;
    const double scale = std::pow(sigma, -(n + 1)) * ((n % 2 == 0) ? 1.0 : -1.0);
    const auto [cd, cm] = term_signs(kind);
    double val = 0.0;
    if (cd != 0.0) val += cd * hermite_he(n, u) * std_normal_pdf(u);
    val += cm * hermite_he(n, v) * std_normal_pdf(v);
    return scale * val;
}

double gauss_legendre(const std::function<double(double)>& g, double a, double b, double max_panel) {
    if (!(b > a)) return 0.0;
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_panel)));
    const double h = (b - a) / static_cast<double>(panels);
    double acc = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double hi = (p + 1 == panels) ? b : lo + h;
        acc += boost::math::quadrature::gauss<double, 32>::integrate(g, lo, hi);
    }
    return acc;
}

std::vector<double> smooth(const Measure1D& mu, double delta, KernelKind kind, std::span<const double> xs) {
    return smooth_measure_impl(mu, delta, 0, kind, xs);
}

std::vector<double> smooth(const WeightedPoints& mu, double delta, KernelKind kind, std::span<const double> xs) {
    return smooth_points_impl(mu, delta, 0, kind, xs);
}

std::vector<double> smooth(const DensityFunction& mu, double delta, KernelKind kind, std::span<const double> xs) {
    return smooth_density_impl(mu, delta, 0, kind, xs);
}

std::vector<double> smooth_derivative(const Measure1D& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind) {
    return smooth_measure_impl(mu, delta, n, kind, xs);
}

std::vector<double> smooth_derivative(const WeightedPoints& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind) {
    return smooth_points_impl(mu, delta, n, kind, xs);
}

std::vector<double> smooth_derivative(const DensityFunction& mu, double delta, int n, std::span<const double> xs,
                                      KernelKind kind) {
    return smooth_density_impl(mu, delta, n, kind, xs);
}

}  // namespace cmv
