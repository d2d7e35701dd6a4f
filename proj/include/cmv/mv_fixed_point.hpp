#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmv/driver.hpp"
#include "cmv/feedback.hpp"
#include "cmv/grid.hpp"
#include "cmv/measure.hpp"

namespace cmv {

/// M driver paths z_j on a shared grid, stored row-major.
class DriverEnsemble {
public:
    struct Provenance {
        std::uint64_t seed = 0;
        DriverSpec::Kind kind = DriverSpec::Kind::brownian;
        double rho = 0.0;
        bool supplied_paths = false;
    };

    /// Path j is idiosyncratic_scale * W_j + common offset, with W_j drawn
    /// from the same stream as particle j of a ParticleSystem with this seed.
    static DriverEnsemble generate(const DriverSpec& spec, const TimeGrid& grid, std::size_t m, std::uint64_t seed);

    /// Explicit paths; each must have grid.n_points() entries and start at 0.
    static DriverEnsemble from_paths(const TimeGrid& grid, const std::vector<std::vector<double>>& paths);

    const TimeGrid& grid() const { return grid_; }
    std::size_t size() const { return m_; }
    std::span<const double> path(std::size_t j) const { return {data_.data() + j * grid_.n_points(), grid_.n_points()}; }
    const Provenance& provenance() const { return prov_; }

private:
    DriverEnsemble(TimeGrid grid, std::size_t m) : grid_(grid), m_(m) {}

    TimeGrid grid_;
    std::size_t m_;
    std::vector<double> data_;
    Provenance prov_;
};

/// M_t = max over grid s <= t of (alpha f(L_s) - z_s).
std::vector<double> sup_functional(const LossPath& loss, const FeedbackFn& f, double alpha, std::span<const double> z);

/// Number of blocks the driver ensemble is split into for reductions and
/// standard errors.
inline constexpr std::size_t kGammaBatches = 20;

struct GammaResult {
    LossPath loss;
    /// Per-batch estimates, each the mean over one contiguous block of paths.
    std::vector<std::vector<double>> batches;
};

/// Gamma(L)_t = (1/M) sum_j F0(M^j_t). Sums run over fixed blocks of paths
/// and then over blocks, so the result does not depend on thread count.
GammaResult gamma_map_batched(const LossPath& loss, const DriverEnsemble& drivers, const Measure1D& nu0, double alpha,
                              const FeedbackFn& f);
LossPath gamma_map(const LossPath& loss, const DriverEnsemble& drivers, const Measure1D& nu0, double alpha,
                   const FeedbackFn& f);

struct PicardConfig {
    Measure1D nu0 = Measure1D::uniform(0.0, 1.0);
    double alpha = 0.0;
    FeedbackFn f = FeedbackFn::linear();
    double tol = 1e-4;
    std::size_t max_iter = 100;
    /// Initial guess on the driver grid; zeros when absent.
    std::optional<std::vector<double>> initial_guess;
};

struct PicardDiagnostics {
    std::vector<double> distances;   ///< d_k = sup |L^{k+1} - L^k|
    std::vector<double> standard_errors;  ///< batch standard error of each d_k
    std::vector<double> ratios;      ///< d_{k+1} / d_k (NaN when d_k = 0)
    double certificate = 0.0;
    bool converged = false;
    std::size_t iterations = 0;      ///< first k with d_k < tol
    std::optional<std::string> warning;

    /// True iff d_{k+1} <= q d_k + 3 SE_{k+1} for every k.
    bool contraction_holds(double q) const;
};

struct PicardResult {
    LossPath loss;
    PicardDiagnostics diagnostics;
};

/// Picard iteration L <- Gamma(L) on a fixed driver ensemble. Stops when
/// d_k < tol or after max_iter steps; without convergence the iterate with
/// the smallest preceding d_k is returned. Negative alpha is used as is,
/// which folds the sign into f.
PicardResult solve_picard(const PicardConfig& cfg, const DriverEnsemble& drivers);

struct ComparisonGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = max_t |Gamma(L)_t - Gamma(Lbar)_t| and
/// rhs = max_t max(mean_j nu0(Mbar_j, M_j], mean_j nu0(M_j, Mbar_j]).
/// Both use the same summation tree, with lhs accumulated from per-sample
/// differences, so lhs <= rhs holds in floating point.
ComparisonGap comparison_gap(const LossPath& loss, const LossPath& loss_bar, const DriverEnsemble& drivers,
                             const Measure1D& nu0, double alpha, const FeedbackFn& f);

/// |alpha| * sup density * Lip(f on [0, max(L_T, Lbar_T)]). Infinite for
/// neglog once the loss reaches 1.
double contraction_certificate(double alpha, const Measure1D& nu0, const FeedbackFn& f, double l_terminal,
                               double lbar_terminal);

/// First grid time with L_t >= 1 - alpha * sup_density. Throws
/// std::domain_error when alpha * sup_density >= 1.
std::optional<double> uniqueness_horizon(const LossPath& loss, double alpha, double sup_density);

/// A_t = alpha * integral of 2 Phi(-x0 / sqrt t) nu0(dx0) on the grid.
std::vector<double> nonphysical_drift(const Measure1D& nu0, double alpha, const TimeGrid& grid);

}  // namespace cmv
