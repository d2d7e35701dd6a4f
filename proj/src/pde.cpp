#include "cmv/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmv {

namespace {

// Solves the interior system for V^{n+1}:
//   (1 + 2r + s) V_j - (r + s) V_{j+1} - r V_{j-1} = V^n_j,  j = 1..J-1,
// with r = dt / (2 dx^2), s = a dt / dx, V_0 = V_J = 0. The matrix is an
// M-matrix, so nonnegative data stay nonnegative.
void implicit_step(const std::vector<double>& prev, std::vector<double>& next, double r, double s,
                   std::vector<double>& cp, std::vector<double>& dp) {
    const std::size_t jmax = prev.size() - 1;
    const double diag = 1.0 + 2.0 * r + s;
    const double upper = -(r + s);
    const double lower = -r;
    // Thomas algorithm over j = 1..J-1.
    cp[1] = upper / diag;
    dp[1] = prev[1] / diag;
    for (std::size_t j = 2; j < jmax; ++j) {
        const double m = diag - lower * cp[j - 1];
        cp[j] = upper / m;
        dp[j] = (prev[j] - lower * dp[j - 1]) / m;
    }
    next[0] = 0.0;
    next[jmax] = 0.0;
    next[jmax - 1] = dp[jmax - 1];
    for (std::size_t j = jmax - 1; j-- > 1;) next[j] = dp[j] - cp[j] * next[j + 1];
}

}  // namespace

double PdeState::mass() const {
    double m = 0.0;
    for (double v : values) m += v;
    return m * dx;
}

double boundary_flux(const PdeState& state) {
    if (state.values.size() < 4) throw std::invalid_argument("boundary_flux: need J >= 3");
    return 0.5 * (4.0 * state.values[1] - state.values[2]) / (2.0 * state.dx);
}

PdeConfig PdeConfig::from_measure(const Measure1D& nu0, double alpha, TimeGrid grid, double dx) {
    PdeConfig cfg;
    cfg.v0_measure = nu0;
    cfg.support_end = nu0.breakpoints().back();
    cfg.alpha = alpha;
    cfg.grid = grid;
    cfg.dx = dx;
    return cfg;
}

PdeResult solve_pde(const PdeConfig& cfg) {
    if (!(cfg.dx > 0.0)) throw std::invalid_argument("pde: dx must be > 0");
    if (!(cfg.alpha >= 0.0)) throw std::invalid_argument("pde: alpha must be >= 0");
    if (cfg.inner_corrections < 0) throw std::invalid_argument("pde: inner_corrections must be >= 0");
    if (!cfg.v0 && !cfg.v0_measure) throw std::invalid_argument("pde: no initial density");

    const TimeGrid& grid = cfg.grid;
    const double dt = grid.dt();
    const double x_max = cfg.x_max > 0.0 ? cfg.x_max : cfg.support_end + 10.0 + 6.0 * std::sqrt(grid.horizon());
    const auto jmax = static_cast<std::size_t>(std::ceil(x_max / cfg.dx));
    if (jmax < 4) throw std::invalid_argument("pde: spatial grid too coarse (need J >= 4)");

    PdeState state;
    state.dx = cfg.dx;
    state.values.assign(jmax + 1, 0.0);
    if (cfg.v0_measure) {
        // Cell averages; node 1 also takes the half cell next to the boundary.
        const Measure1D& mu = *cfg.v0_measure;
        for (std::size_t j = 1; j < jmax; ++j) {
            const double lo = j == 1 ? 0.0 : (static_cast<double>(j) - 0.5) * cfg.dx;
            const double hi = (static_cast<double>(j) + 0.5) * cfg.dx;
            state.values[j] = mu.interval_mass(lo, hi) / cfg.dx;
        }
    } else {
        for (std::size_t j = 1; j < jmax; ++j) state.values[j] = std::max(0.0, cfg.v0(state.x(j)));
    }

    PdeResult res{LossPath(grid, std::vector<double>(grid.n_points(), 0.0)), {}, {}, {}, {}, 0.0, 0.0, 0.0, false, {}, {}};
    res.initial_mass = state.mass();
    const double invariant = 1.0 - res.initial_mass;

    std::vector<std::size_t> snap_steps;
    for (double t : cfg.snapshot_times) snap_steps.push_back(grid.index_of(t));
    auto snapshot = [&](std::size_t step) {
        for (std::size_t s : snap_steps)
            if (s == step) res.snapshots.push_back({grid.time(step), state.values});
    };

    std::vector<double> loss{0.0};
    res.flux.push_back(boundary_flux(state));
    res.loss_rate.push_back(0.0);
    snapshot(0);

    const double r = dt / (2.0 * cfg.dx * cfg.dx);
    const auto window_steps = static_cast<std::size_t>(std::llround(cfg.explosion_window / dt));
    std::vector<double> next(jmax + 1), cp(jmax + 1), dp(jmax + 1);
    std::vector<double> sq_prefix{0.0};
    double rate = 0.0;  // loss rate of the previous step

    for (std::size_t n = 0; n < grid.n_steps(); ++n) {
        double a = cfg.alpha * rate;
        double step_rate = 0.0;
        for (int c = 0; c <= cfg.inner_corrections; ++c) {
            implicit_step(state.values, next, r, a * dt / cfg.dx, cp, dp);
            step_rate = next[1] / (2.0 * cfg.dx) + a * next[1];
            a = cfg.alpha * step_rate;
            if (cfg.alpha == 0.0) break;
        }
        double clip = 0.0;
        for (double& v : next) {
            if (v < 0.0) {
                clip -= v;
                v = 0.0;
            }
        }
        clip *= cfg.dx;
        res.total_clip += clip;
        if (clip > 1e-6) res.warnings.push_back("negative mass clipped at t=" + std::to_string(grid.time(n + 1)));

        state.values.swap(next);
        state.loss = std::min(1.0, state.loss + dt * step_rate);
        state.time = grid.time(n + 1);
        rate = step_rate;

        loss.push_back(state.loss);
        res.flux.push_back(boundary_flux(state));
        res.loss_rate.push_back(step_rate);
        res.max_mass_balance_error =
            std::max(res.max_mass_balance_error, std::abs((1.0 - state.loss - state.mass()) - invariant));
        snapshot(n + 1);

        sq_prefix.push_back(sq_prefix.back() + step_rate * step_rate * dt);
        const std::size_t i = n + 1;
        if (window_steps > 0 && i >= window_steps) {
            const double l2 = std::sqrt(std::max(0.0, sq_prefix[i] - sq_prefix[i - window_steps]));
            if (l2 > cfg.explosion_cap) {
                res.explosion_suspected = true;
                res.explosion_time = grid.time(i);
                res.warnings.push_back("explosion suspected at t=" + std::to_string(grid.time(i)));
                break;
            }
        }
    }

    const std::size_t done = loss.size() - 1;
    if (done == grid.n_steps()) {
        res.loss = LossPath(grid, std::move(loss));
    } else {
        res.loss = LossPath(TimeGrid(grid.time(done), dt), std::move(loss));
    }
    res.final_state = std::move(state);
    return res;
}

std::vector<double> stefan_transform(std::span<const double> values, double dx, double loss, double alpha) {
    const double front = alpha * loss;
    std::vector<double> v(values.size(), 0.0);
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double y = static_cast<double>(j) * dx - front;
        if (y < 0.0) continue;
        const double pos = y / dx;
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= values.size()) {
            v[j] = k < values.size() ? -alpha * values[k] : 0.0;
            continue;
        }
        const double w = pos - static_cast<double>(k);
        v[j] = -alpha * ((1.0 - w) * values[k] + w * values[k + 1]);
    }
    return v;
}

std::optional<double> detect_explosion(std::span<const double> flux, double dt, double window, double cap) {
    if (!(cap > 0.0)) throw std::invalid_argument("detect_explosion: cap must be > 0");
    const auto k = static_cast<std::size_t>(std::llround(window / dt));
    if (k == 0) return std::nullopt;
    double sum = 0.0;
    for (std::size_t i = 1; i < flux.size(); ++i) {
        sum += flux[i] * flux[i] * dt;
        if (i > k) sum -= flux[i - k] * flux[i - k] * dt;
        if (i >= k && std::sqrt(std::max(0.0, sum)) > cap) return static_cast<double>(i) * dt;
    }
    return std::nullopt;
}

}  // namespace cmv
