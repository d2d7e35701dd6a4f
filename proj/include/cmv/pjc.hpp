#pragma once

#include <cstddef>
#include <span>

#include "cmv/feedback.hpp"
#include "cmv/measure.hpp"

namespace cmv {

/// Inputs of the jump condition for a general feedback function.
struct JumpQuery {
    const Measure1D& mu;  ///< pre-jump measure restricted to [0, inf)
    double alpha;
    const FeedbackFn& f;
    double l_minus = 0.0;  ///< loss just before the jump
};

/// Physical jump size inf{x > 0 : F(alpha x) < x} for f(x) = x.
///
/// Solved segment by segment in closed form. Tangent stretches where
/// F(alpha x) = x are not shortfalls; when no shortfall exists before the
/// total mass m, the result is m. Throws std::domain_error for alpha <= 0.
double jump_size(const Measure1D& mu, double alpha);

/// inf{x > 0 : F(alpha (f(x + L-) - f(L-))) < x} by bracketing and bisection
/// (tolerance 1e-10). Reduces to jump_size when f is linear. Throws
/// std::domain_error for alpha <= 0, a decreasing f or L- outside [0,1).
double jump_size_general(const JumpQuery& q);

/// True iff the measure does not jump at time 0 under (alpha, f).
bool check_initial_admissible(const Measure1D& mu, double alpha, const FeedbackFn& f);

/// Lattice form of the jump condition for N equally weighted atoms:
/// min{ j >= 0 : #{i : position_i <= alpha (f(L + j/N) - f(L))} <= j }.
/// Positions must be sorted ascending.
std::size_t discrete_jump_count(std::span<const double> sorted_positions, double alpha, std::size_t n_total,
                                const FeedbackFn& f, double l_prev);

}  // namespace cmv
