#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cmv/driver.hpp"
#include "cmv/feedback.hpp"
#include "cmv/grid.hpp"
#include "cmv/measure.hpp"

namespace cmv {

/// Kernel density output requested from a particle run.
struct DensityEstimation {
    double delta = 0.0;            ///< kernel variance; <= 0 means N^{-1/3}
    std::vector<double> times;     ///< snapshot times (snapped to the grid)
    std::vector<double> xs;        ///< evaluation points
};

struct ParticleConfig {
    std::size_t n_particles = 1000;
    double alpha = 0.0;
    FeedbackFn feedback = FeedbackFn::linear();
    Measure1D nu0 = Measure1D::uniform(0.0, 1.0);
    TimeGrid grid{1.0, 1e-3};
    DriverSpec driver;
    std::uint64_t seed = 0;
    /// Degenerate start X0 = x for every particle (testing only).
    std::optional<double> initial_point;
    /// Brownian-bridge barrier check inside each step.
    bool brownian_bridge = false;
    std::optional<DensityEstimation> density;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

/// State of the N-particle system.
struct ParticleEnsemble {
    std::vector<double> positions;      ///< X_i; frozen (<= 0) once absorbed
    std::vector<std::uint8_t> alive;
    std::vector<double> default_time;   ///< +inf while alive
    std::size_t n_dead = 0;
    std::size_t step = 0;
    double time = 0.0;

    std::size_t size() const { return positions.size(); }
    double loss() const { return static_cast<double>(n_dead) / static_cast<double>(positions.size()); }
    std::vector<double> alive_positions() const;
};

/// Size of the contagion cascade for one step.
///
/// Starting from k0 = #{x_i <= 0}, iterates
///   k <- #{i : x_i <= alpha (f(L + k/N) - f(L))}
/// to its least fixed point. Positions must be sorted ascending.
std::size_t resolve_cascade(std::span<const double> sorted_alive_positions, double alpha, std::size_t n_total,
                            const FeedbackFn& f, double l_prev);

/// Particle system advanced one grid step at a time.
///
/// Internally each particle carries X0 + sqrt(1-rho^2) W; the common offset
/// rho beta + A and the feedback alpha f(L) are shared scalars, so a particle
/// is absorbed at step n exactly when its carried value falls to
/// alpha f(L_n) - offset_n or below.
class ParticleSystem {
public:
    explicit ParticleSystem(ParticleConfig cfg);

    const ParticleConfig& config() const { return cfg_; }
    std::size_t step_index() const { return step_; }
    bool done() const { return step_ >= cfg_.grid.n_steps(); }

    /// Advance one step; returns the number of particles absorbed in it.
    /// Throws std::runtime_error when a position becomes non-finite.
    std::size_t step();

    double loss() const { return static_cast<double>(n_dead_) / static_cast<double>(n_); }
    std::size_t n_alive() const { return n_ - n_dead_; }

    /// Current positions of alive particles, in index order.
    std::vector<double> alive_positions() const;
    ParticleEnsemble ensemble() const;

private:
    double feedback_level(double loss) const;

    ParticleConfig cfg_;
    std::size_t n_;
    double sigma_sdt_;
    std::vector<double> offset_;
    std::vector<double> carried_;
    std::vector<double> spare_normal_;
    std::vector<std::uint8_t> alive_;
    std::vector<std::uint8_t> forced_;
    std::vector<double> frozen_;
    std::vector<double> default_time_;
    std::vector<double> candidates_;
    std::size_t n_dead_ = 0;
    std::size_t step_ = 0;
};

struct DensitySnapshot {
    double time;
    std::vector<double> xs;
    std::vector<double> values;
};

struct ParticleRun {
    LossPath loss;
    ParticleEnsemble final_state;
    std::vector<DensitySnapshot> snapshots;
    std::vector<std::size_t> absorbed_per_step;
};

/// Runs the configured system over the whole grid. Deterministic in (cfg).
ParticleRun simulate_particles(const ParticleConfig& cfg);

/// (1/N) * sum over alive particles of G_delta(x_i, x).
std::vector<double> estimate_density(const ParticleEnsemble& ensemble, double delta, std::span<const double> xs);

}  // namespace cmv
