#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cmv/kernels.hpp"
#include "cmv/particle.hpp"
#include "cmv/pjc.hpp"

using namespace cmv;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

ParticleConfig base_config(std::size_t n, double alpha, std::uint64_t seed) {
    ParticleConfig cfg;
    cfg.n_particles = n;
    cfg.alpha = alpha;
    cfg.nu0 = Measure1D::uniform(0.0, 2.0);
    cfg.grid = TimeGrid(1.0, 1e-3);
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("cascade examples") {
    const FeedbackFn lin = FeedbackFn::linear();
    const std::vector<double> a{0.5, 0.6, 0.7, 0.8};
    CHECK(resolve_cascade(a, 1.0, 4, lin, 0.0) == 0);
    const std::vector<double> b{-0.1, 0.2, 0.3, 2.0};
    CHECK(resolve_cascade(b, 1.0, 4, lin, 0.0) == 3);
    const std::vector<double> c{-0.5, -0.2};
    CHECK(resolve_cascade(c, 1.0, 2, lin, 0.0) == 2);
    CHECK(resolve_cascade(b, 0.0, 4, lin, 0.0) == 1);
}

TEST_CASE("cascade is the least fixed point and matches the lattice jump condition") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const FeedbackFn lin = FeedbackFn::linear(), nl = FeedbackFn::neglog();
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n_total = 50 + static_cast<std::size_t>(200 * unif(gen));
        const std::size_t n_alive = n_total / 2 + static_cast<std::size_t>(unif(gen) * (n_total / 2));
        std::vector<double> pos(n_alive);
        for (double& x : pos) x = 0.6 * unif(gen) - 0.02;
        std::sort(pos.begin(), pos.end());
        const double alpha = 3.0 * unif(gen);
        const double l_prev = static_cast<double>(n_total - n_alive) / static_cast<double>(n_total);
        const FeedbackFn& f = rep % 2 ? lin : nl;
        if (&f == &nl && l_prev + static_cast<double>(n_alive) / n_total >= 1.0) continue;

        const std::size_t k = resolve_cascade(pos, alpha, n_total, f, l_prev);
        auto g = [&](std::size_t j) {
            const double thr = alpha * (f(l_prev + static_cast<double>(j) / n_total) - f(l_prev));
            return static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), thr) - pos.begin());
        };
        const std::size_t k0 = g(0);  // particles already at or below 0
        CHECK(g(k) == k);
        for (std::size_t j = k0; j < k; ++j) CHECK(g(j) > j);
        if (&f == &lin) CHECK(k == discrete_jump_count(pos, alpha, n_total, f, l_prev));
    }
}

TEST_CASE("free particles reproduce the reflection principle") {
    // P(min_{s<=1} (1 + W_s) <= 0) = 2 Phi(-1).
    const double exact = 2.0 * normal_cdf(-1.0);
    CHECK(exact == doctest::Approx(0.31731).epsilon(1e-4));
    const std::size_t n = 20000;
    double plain = 0.0, bridged = 0.0;
    const int seeds = 4;
    for (int s = 0; s < seeds; ++s) {
        ParticleConfig cfg = base_config(n, 0.0, 100 + s);
        cfg.initial_point = 1.0;
        plain += simulate_particles(cfg).loss.values.back();
        cfg.brownian_bridge = true;
        bridged += simulate_particles(cfg).loss.values.back();
    }
    plain /= seeds;
    bridged /= seeds;
    const double mc = 4.0 / std::sqrt(static_cast<double>(n * seeds));
    // Discrete monitoring misses crossings, biasing the plain estimate low by O(sqrt dt).
    CHECK(std::abs(plain - exact) <= mc + std::sqrt(1e-3));
    CHECK(plain <= bridged);
    CHECK(std::abs(bridged - exact) <= mc);
}

TEST_CASE("runs are deterministic and structurally consistent") {
    const ParticleConfig cfg = base_config(5000, 1.5, 7);
    const ParticleRun a = simulate_particles(cfg), b = simulate_particles(cfg);
    CHECK(a.loss.values == b.loss.values);
    CHECK(a.final_state.positions == b.final_state.positions);

    const auto& l = a.loss.values;
    CHECK(l.front() == 0.0);
    for (std::size_t i = 1; i < l.size(); ++i) {
        CHECK(l[i] >= l[i - 1]);
        const double scaled = l[i] * 5000.0;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
    }
    const ParticleEnsemble& e = a.final_state;
    CHECK(e.loss() * 5000.0 == doctest::Approx(static_cast<double>(e.n_dead)));
    std::size_t dead = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e.alive[i]) {
            CHECK(e.positions[i] > 0.0);
            CHECK(std::isinf(e.default_time[i]));
        } else {
            ++dead;
            CHECK(e.positions[i] <= 1e-12);
            CHECK(e.default_time[i] <= e.time);
        }
    }
    CHECK(dead == e.n_dead);
    std::size_t absorbed = 0;
    for (std::size_t k : a.absorbed_per_step) absorbed += k;
    CHECK(absorbed == e.n_dead);
}

TEST_CASE("stepping by hand matches the batch driver") {
    ParticleConfig cfg = base_config(2000, 1.0, 3);
    cfg.grid = TimeGrid(0.2, 1e-3);
    ParticleSystem sys(cfg);
    const ParticleRun run = simulate_particles(cfg);
    std::size_t n = 0;
    while (!sys.done()) {
        sys.step();
        ++n;
        CHECK(sys.loss() == run.loss.values[n]);
    }
    CHECK(sys.alive_positions() == run.final_state.alive_positions());
}

TEST_CASE("loss is pathwise monotone in alpha under common noise") {
    std::vector<double> prev;
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.5}) {
        const auto l = simulate_particles(base_config(3000, alpha, 11)).loss.values;
        if (!prev.empty())
            for (std::size_t i = 0; i < l.size(); ++i) CHECK(l[i] >= prev[i]);
        prev = l;
    }
}

TEST_CASE("initial cascade for nonpositive starts") {
    ParticleConfig cfg = base_config(100, 1.0, 1);
    cfg.initial_point = 0.0;
    cfg.grid = TimeGrid(0.01, 1e-3);
    const auto run = simulate_particles(cfg);
    CHECK(run.loss.values.front() == 1.0);
}

TEST_CASE("invalid particle configurations") {
    ParticleConfig cfg = base_config(0, 1.0, 1);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_particles = 10;
    cfg.alpha = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.alpha = 1.0;
    cfg.nu0 = Measure1D({0.0, 1.0}, {0.0, 0.5});
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.nu0 = Measure1D::uniform(0.0, 1.0);
    cfg.feedback = FeedbackFn::table({0.0, 0.5, 1.0}, {0.0, 1.0, 0.5});
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("kernel density estimate of the ensemble") {
    ParticleEnsemble e;
    e.positions = {0.7};
    e.alive = {1};
    e.default_time = {INFINITY};
    const double delta = 0.01;
    const std::vector<double> zero{0.0};
    CHECK(estimate_density(e, delta, zero)[0] == 0.0);

    e.positions = {0.3, 0.9, -0.2};
    e.alive = {1, 1, 0};
    e.default_time = {INFINITY, INFINITY, 0.1};
    e.n_dead = 1;
    auto phi = [&](double y) { return std::exp(-y * y / (2 * delta)) / std::sqrt(2 * std::numbers::pi * delta); };
    const std::vector<double> xs{0.1, 0.35, 0.8, 1.2};
    const auto v = estimate_density(e, delta, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double expected = 0.0;
        for (double p : {0.3, 0.9}) expected += (phi(p - xs[i]) - phi(p + xs[i])) / 3.0;
        CHECK(v[i] == doctest::Approx(expected).epsilon(1e-12));
    }

    // Trapezoid mass of an estimate from a real run stays below the alive fraction.
    const ParticleRun run = simulate_particles(base_config(4000, 1.0, 5));
    std::vector<double> grid;
    for (int k = 0; k <= 8000; ++k) grid.push_back(k * 1e-3);
    const auto dens = estimate_density(run.final_state, std::pow(4000.0, -1.0 / 3.0), grid);
    double mass = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) mass += 0.5 * (dens[k] + dens[k - 1]) * 1e-3;
    const double alive = 1.0 - run.final_state.loss();
    CHECK(mass <= alive + 1e-8);
    CHECK(mass > 0.5 * alive);
}

TEST_CASE("density snapshots requested in the config") {
    ParticleConfig cfg = base_config(2000, 1.0, 2);
    cfg.grid = TimeGrid(0.5, 1e-3);
    cfg.density = DensityEstimation{0.0, {0.0, 0.25, 0.5}, {0.1, 0.5, 1.0}};
    const ParticleRun run = simulate_particles(cfg);
    REQUIRE(run.snapshots.size() == 3);
    CHECK(run.snapshots[1].time == doctest::Approx(0.25));
    for (const auto& s : run.snapshots) {
        REQUIRE(s.values.size() == 3);
        for (double v : s.values) CHECK(v >= 0.0);
    }
}
