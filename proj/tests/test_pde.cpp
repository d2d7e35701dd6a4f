#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cmv/pde.hpp"

using namespace cmv;

namespace {

// Dirichlet heat solution with unit initial mass:
// V(t, x) = (1 + t)^{-3/2} x exp(-x^2 / (2 (1 + t))), so L_t = 1 - (1 + t)^{-1/2}.
double heat_solution(double t, double x) { return std::pow(1.0 + t, -1.5) * x * std::exp(-x * x / (2.0 * (1.0 + t))); }

PdeConfig heat_config(double dx, double dt, double horizon = 1.0) {
    PdeConfig cfg;
    cfg.v0 = [](double x) { return heat_solution(0.0, x); };
    cfg.alpha = 0.0;
    cfg.grid = TimeGrid(horizon, dt);
    cfg.dx = dx;
    cfg.x_max = 14.0;
    return cfg;
}

double heat_error(double dx, double dt) {
    const PdeResult r = solve_pde(heat_config(dx, dt));
    double err = 0.0;
    for (std::size_t i = 0; i < r.loss.values.size(); ++i) {
        const double t = r.loss.grid.time(i);
        err = std::max(err, std::abs(r.loss.values[i] - (1.0 - 1.0 / std::sqrt(1.0 + t))));
    }
    return err;
}

PdeState state_from(double dx, std::size_t n, double (*v)(double)) {
    PdeState s;
    s.dx = dx;
    for (std::size_t j = 0; j < n; ++j) s.values.push_back(v(static_cast<double>(j) * dx));
    return s;
}

}  // namespace

TEST_CASE("boundary flux stencil") {
    const double dx = 0.01;
    CHECK(boundary_flux(state_from(dx, 50, [](double x) { return x; })) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(boundary_flux(state_from(dx, 50, [](double) { return 0.0; })) == 0.0);
    CHECK(std::abs(boundary_flux(state_from(dx, 50, [](double x) { return x * x; }))) <= 1e-15);
    CHECK_THROWS_AS(boundary_flux(state_from(dx, 3, [](double x) { return x; })), std::invalid_argument);
}

TEST_CASE("heat equation without feedback") {
    PdeConfig cfg = heat_config(1e-3, 1e-4);
    cfg.snapshot_times = {0.5};
    const PdeResult r = solve_pde(cfg);
    CHECK(std::abs(r.loss.terminal() - (1.0 - 1.0 / std::sqrt(2.0))) <= 1e-3);
    CHECK_FALSE(r.explosion_suspected);
    REQUIRE(r.snapshots.size() == 1);
    double err = 0.0;
    for (std::size_t j = 0; j < r.snapshots[0].values.size(); ++j)
        err = std::max(err, std::abs(r.snapshots[0].values[j] - heat_solution(0.5, j * 1e-3)));
    CHECK(err <= 1e-3);
    CHECK(r.max_mass_balance_error <= 10.0 * 1e-6 + 10.0 * 1e-4);
}

TEST_CASE("halving the step sizes shrinks the error") {
    const double coarse = heat_error(8e-3, 8e-4);
    const double fine = heat_error(4e-3, 4e-4);
    CHECK(coarse / fine >= 1.5);
}

TEST_CASE("zero initial density stays at zero") {
    PdeConfig cfg;
    cfg.v0 = [](double) { return 0.0; };
    cfg.alpha = 1.0;
    cfg.grid = TimeGrid(0.1, 1e-3);
    cfg.dx = 1e-2;
    cfg.x_max = 5.0;
    const PdeResult r = solve_pde(cfg);
    for (double l : r.loss.values) CHECK(l == 0.0);
    for (double v : r.final_state.values) CHECK(v == 0.0);
}

TEST_CASE("mass balance and maximum principle with feedback") {
    const double dx = 2e-3, dt = 1e-4;
    PdeConfig cfg = PdeConfig::from_measure(Measure1D::uniform(0.0, 2.0), 1.0, TimeGrid(1.0, dt), dx);
    cfg.snapshot_times = {0.1, 0.25, 0.5, 0.75, 1.0};
    const PdeResult r = solve_pde(cfg);
    CHECK(r.initial_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.max_mass_balance_error <= 10.0 * dx * dx + 10.0 * dt);
    const double invariant = 1.0 - r.initial_mass;
    CHECK(std::abs(1.0 - r.final_state.loss - r.final_state.mass() - invariant) <= 10.0 * dx * dx + 10.0 * dt);
    for (std::size_t i = 1; i < r.loss.values.size(); ++i) CHECK(r.loss.values[i] >= r.loss.values[i - 1]);
    REQUIRE(r.snapshots.size() == 5);
    for (const auto& s : r.snapshots) CHECK(*std::max_element(s.values.begin(), s.values.end()) <= 0.5 + 1e-9);
    for (const auto& s : r.snapshots) CHECK(*std::min_element(s.values.begin(), s.values.end()) >= 0.0);
    for (const auto& s : r.snapshots) {
        CHECK(s.values.front() == 0.0);
        CHECK(s.values.back() == 0.0);
    }
    CHECK_FALSE(r.explosion_suspected);
    CHECK_FALSE(detect_explosion(r.loss_rate, dt, cfg.explosion_window, cfg.explosion_cap));
}

TEST_CASE("free-boundary transform") {
    const double dx = 1e-2;
    const PdeState s = state_from(dx, 200, [](double x) { return x * std::exp(-x); });
    const auto v0 = stefan_transform(s.values, dx, 0.0, 1.0);
    for (std::size_t j = 0; j < v0.size(); ++j) CHECK(v0[j] == doctest::Approx(-s.values[j]));

    // Front on a grid node: v vanishes there and is zero to its left.
    const auto v = stefan_transform(s.values, dx, 0.2, 1.5);
    for (std::size_t j = 0; j <= 30; ++j) CHECK(std::abs(v[j]) <= 1e-12);
    CHECK(v[40] == doctest::Approx(-1.5 * s.values[10]));
    CHECK(v[35] == doctest::Approx(-1.5 * s.values[5]));
}

TEST_CASE("free-boundary gradient at the front follows the loss rate") {
    // v(x) = -alpha V(x - alpha L); chain rule gives d/dx v = -alpha V_x(0) = -2 alpha L' at the front.
    const double dx = 1e-3, dt = 1e-4, alpha = 1.0;
    PdeConfig cfg;
    cfg.v0 = [](double x) { return x * std::exp(-x * x / 2.0); };
    cfg.alpha = alpha;
    cfg.grid = TimeGrid(0.5, dt);
    cfg.dx = dx;
    cfg.x_max = 12.0;
    cfg.snapshot_times = {0.1, 0.3, 0.5};
    const PdeResult r = solve_pde(cfg);
    REQUIRE(r.snapshots.size() == 3);
    for (const auto& snap : r.snapshots) {
        const std::size_t i = r.loss.grid.index_of(snap.time);
        const double l = r.loss.values[i];
        const auto v = stefan_transform(snap.values, dx, l, alpha);
        const double front = alpha * l;
        CHECK(std::abs(v[static_cast<std::size_t>(front / dx)]) <= 1e-12);
        // One-sided difference just right of the front.
        const auto j = static_cast<std::size_t>(std::ceil(front / dx)) + 1;
        const double slope = (v[j + 1] - v[j]) / dx;
        const double rate = r.loss_rate[i];
        CHECK(slope == doctest::Approx(-2.0 * alpha * rate).epsilon(0.02));
    }
}

TEST_CASE("explosion detector") {
    const std::vector<double> zero(100, 0.0);
    CHECK_FALSE(detect_explosion(zero, 0.01, 0.1, 1.0));
    const std::vector<double> flat(100, 5.0);
    // L2 norm over a window of 0.1 is 5 sqrt(0.1) = 1.58 > 1.5.
    const auto t = detect_explosion(flat, 0.01, 0.1, 1.5);
    REQUIRE(t);
    CHECK(*t == doctest::Approx(0.1));
    CHECK_FALSE(detect_explosion(flat, 0.01, 0.1, 1.6));
    CHECK_THROWS_AS(detect_explosion(flat, 0.01, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("strong feedback triggers the explosion cap") {
    PdeConfig cfg = PdeConfig::from_measure(Measure1D::uniform(0.1, 0.4), 4.0, TimeGrid(0.5, 1e-4), 2e-3);
    cfg.explosion_window = 0.01;
    cfg.explosion_cap = 5.0;
    const PdeResult r = solve_pde(cfg);
    CHECK(r.explosion_suspected);
    REQUIRE(r.explosion_time);
    CHECK(*r.explosion_time < 0.5);
    CHECK(r.loss.grid.horizon() == doctest::Approx(*r.explosion_time));
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("invalid solver settings") {
    PdeConfig cfg = heat_config(1e-2, 1e-3, 0.1);
    cfg.dx = 0.0;
    CHECK_THROWS_AS(solve_pde(cfg), std::invalid_argument);
    cfg = heat_config(1e-2, 1e-3, 0.1);
    cfg.alpha = -1.0;
    CHECK_THROWS_AS(solve_pde(cfg), std::invalid_argument);
    cfg = heat_config(1e-2, 1e-3, 0.1);
    cfg.v0 = nullptr;
    CHECK_THROWS_AS(solve_pde(cfg), std::invalid_argument);
}
