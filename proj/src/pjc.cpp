#include "cmv/pjc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cmv {

namespace {

// Values of F and x live in [0,1]; anything within this band of zero is a
// tangency, not a shortfall.
constexpr double kZeroBand = 1e-13;
constexpr double kBisectionTol = 1e-12;
constexpr double kSnapTol = 1e-10;
constexpr int kMaxBisection = 200;

}  // namespace

double jump_size(const Measure1D& mu, double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("jump_size: alpha must be > 0");
    const auto xs = mu.breakpoints();
    const auto fs = mu.cdf_values();

    double a = 0.0;
    double ga = 0.0;  // F(0) - 0
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double b = xs[j] / alpha;
        if (!(b > a)) continue;
        const double gb = fs[j] - b;
        if (gb < -kZeroBand) {
            if (ga <= kZeroBand) return a;
            return a + ga * (b - a) / (ga - gb);
        }
        a = b;
        ga = gb;
    }
    // Past the last breakpoint F is flat at the total mass m: G(x) = m - x.
    if (ga <= kZeroBand) return a;
    return mu.total_mass();
}

double jump_size_general(const JumpQuery& q) {
    if (!(q.alpha > 0.0)) throw std::domain_error("jump_size_general: alpha must be > 0");
    if (!q.f.nondecreasing()) throw std::domain_error("jump_size_general: feedback must be nondecreasing");
    if (!(q.l_minus >= 0.0 && q.l_minus < 1.0)) throw std::domain_error("jump_size_general: L- must be in [0,1)");
    if (q.f.kind() == FeedbackFn::Kind::linear) return jump_size(q.mu, q.alpha);

    const double headroom = 1.0 - q.l_minus;
    const double f_base = q.f.eval_unchecked(q.l_minus);
    auto level = [&](double x) {
        return q.alpha * (q.f.eval_unchecked(std::min(1.0, x + q.l_minus)) - f_base);
    };
    auto h = [&](double x) { return q.mu.cdf(level(x)) - x; };

    // Knots of h: breakpoints of F pulled back through the level map, plus
    // the kinks of a tabulated f.
    std::vector<double> knots;
    for (double xb : q.mu.breakpoints()) {
        if (!(xb > 0.0)) continue;
        const double x = q.f.inverse(xb / q.alpha + f_base) - q.l_minus;
        if (x > 0.0 && x < headroom) knots.push_back(x);
    }
    for (double t : q.f.knots())
        if (t > q.l_minus) knots.push_back(t - q.l_minus);
    knots.push_back(headroom);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    // First point of {h < 0} inside [lo, hi], given h(lo) >= 0 > h(hi) and a
    // single crossing in between.
    auto first_shortfall = [&](double lo, double hi, double h_lo) {
        const double start = lo;
        for (int it = 0; it < kMaxBisection && hi - lo > kBisectionTol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (h(mid) < -kZeroBand)
                hi = mid;
            else
                lo = mid;
        }
        if (h_lo <= kZeroBand && hi - start <= kSnapTol) return start;
        return hi;
    };

    double a = 0.0;
    double ha = 0.0;
    for (double b : knots) {
        if (!(b > a)) continue;
        const double hb = h(b);
        if (hb < -kZeroBand) return first_shortfall(a, b, ha);
        if (q.f.kind() == FeedbackFn::Kind::neglog) {
            // Convex between knots; the stationary point solves s * level'(x) = 1.
            const double s = q.mu.density(level(0.5 * (a + b)));
            const double x_star = headroom - s * q.alpha;
            if (s > 0.0 && x_star > a && x_star < b && h(x_star) < -kZeroBand)
                return first_shortfall(a, x_star, ha);
        }
        a = b;
        ha = hb;
    }
    return std::min(q.mu.total_mass(), headroom);
}

bool check_initial_admissible(const Measure1D& mu, double alpha, const FeedbackFn& f) {
    return jump_size_general({mu, alpha, f, 0.0}) == 0.0;
}

std::size_t discrete_jump_count(std::span<const double> sorted_positions, double alpha, std::size_t n_total,
                                const FeedbackFn& f, double l_prev) {
    const double n = static_cast<double>(n_total);
    const double f_base = f.eval_unchecked(l_prev);
    for (std::size_t j = 0; j <= sorted_positions.size(); ++j) {
        const double arg = l_prev + static_cast<double>(j) / n;
        const double threshold = arg >= 1.0 ? std::numeric_limits<double>::infinity()
                                            : alpha * (f.eval_unchecked(arg) - f_base);
        const auto count = static_cast<std::size_t>(
            std::upper_bound(sorted_positions.begin(), sorted_positions.end(), threshold) - sorted_positions.begin());
        if (count <= j) return j;
    }
    return sorted_positions.size();
}

}  // namespace cmv
