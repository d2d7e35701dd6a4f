#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmv/grid.hpp"
#include "cmv/measure.hpp"

namespace cmv {

// Density V_t(x) of surviving mass for rho = 0 and f(x) = x:
//
//   dV/dt = 1/2 V_xx + alpha L'(t) V_x,   V(t, 0) = 0,   L'(t) = 1/2 V_x(t, 0).
//
// Discretised on x_j = j dx, j = 0..J, with V_0 = V_J = 0.

struct PdeState {
    double dx = 0.0;
    std::vector<double> values;  ///< V_j, j = 0..J
    double loss = 0.0;
    double time = 0.0;

    double x(std::size_t j) const { return static_cast<double>(j) * dx; }
    double mass() const;
};

/// 1/2 (4 V_1 - V_2) / (2 dx). Throws std::invalid_argument for J < 3.
double boundary_flux(const PdeState& state);

struct PdeConfig {
    /// Initial density; cell averages are used when given as a measure.
    std::function<double(double)> v0;
    std::optional<Measure1D> v0_measure;
    double support_end = 0.0;  ///< right end of the support of V0 (0 for Gaussian-tailed data)
    double alpha = 0.0;
    TimeGrid grid{1.0, 1e-4};
    double dx = 2e-3;
    double x_max = 0.0;        ///< <= 0 selects support_end + 10 + 6 sqrt(T)
    int inner_corrections = 2;
    std::vector<double> snapshot_times;
    double explosion_window = 0.05;
    double explosion_cap = 50.0;

    static PdeConfig from_measure(const Measure1D& nu0, double alpha, TimeGrid grid, double dx);
};

struct PdeSnapshot {
    double time;
    std::vector<double> values;
};

struct PdeResult {
    LossPath loss;                  ///< on [0, T], or up to the halt time
    std::vector<double> flux;       ///< boundary_flux at each grid time
    std::vector<double> loss_rate;  ///< (L_{n+1} - L_n) / dt, first entry 0
    std::vector<PdeSnapshot> snapshots;
    PdeState final_state;
    double initial_mass = 0.0;
    double max_mass_balance_error = 0.0;
    double total_clip = 0.0;
    bool explosion_suspected = false;
    std::optional<double> explosion_time;
    std::vector<std::string> warnings;
};

/// Implicit Euler with upwind transport. The transport coefficient
/// alpha L' is lagged and refreshed by inner_corrections re-solves per step.
/// L increases by the discrete boundary loss dt (V_1 / (2 dx) + a V_1), which
/// keeps 1 - L - sum V dx constant up to rounding.
PdeResult solve_pde(const PdeConfig& cfg);

/// v(x) = -alpha V(x - alpha L) for x >= alpha L (linear interpolation), 0
/// to the left of the front. Evaluated on the same spatial grid.
std::vector<double> stefan_transform(std::span<const double> values, double dx, double loss, double alpha);

/// First time t >= window at which the L2 norm of the flux over
/// (t - window, t] exceeds cap. Flux entry i belongs to grid time i dt.
std::optional<double> detect_explosion(std::span<const double> flux, double dt, double window, double cap);

}  // namespace cmv
