#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmv/grid.hpp"
#include "cmv/measure.hpp"
#include "cmv/particle.hpp"

namespace cmv {

struct JumpRecord {
    double time;        ///< grid time at which the jump has happened
    std::size_t step;   ///< index of that grid time
    double size;
    std::size_t peak_step;  ///< step with the largest single increment
};

/// Grid increments of L above threshold; adjacent ones merge into a single
/// record at the time of the first. Throws std::domain_error for threshold <= 0.
std::vector<JumpRecord> detect_jumps(const LossPath& loss, double threshold);

/// Physical jump size of the pre-jump measure (linear feedback).
double jump_from_density(const Measure1D& v_minus, double alpha);

/// Measure with CDF F(x + alpha dL) - F(alpha dL). Empty when no mass is
/// left after the shift. Throws std::invalid_argument for dL < 0.
std::optional<Measure1D> restart_density(const Measure1D& v_minus, double alpha, double delta_l);

/// Piecewise-linear CDF from density samples on ascending xs >= 0 (trapezoid
/// rule per cell). A target mass rescales the result.
Measure1D measure_from_density_samples(std::span<const double> xs, std::span<const double> values,
                                       std::optional<double> target_mass = std::nullopt);

/// Mass-preserving kernel estimate of an empirical measure: reflecting
/// Gaussian kernel of variance delta, tabulated with the given cell width,
/// rescaled to weight * #points.
Measure1D smoothed_empirical_measure(std::span<const double> points, double weight, double delta, double cell);

struct CertificateProbe {
    double x_max = 0.25;
    std::size_t samples = 512;
};

struct ShortTimeCertificate {
    double c;
    int n;
    double x0;
};

/// Looks for V(x) <= 1/alpha - c x^n near 0, n = 1..8.
///
/// The gap g = 1/alpha - V is sampled at x_k = k x_max / samples. x0 is the
/// first sample with g <= 0 (x_max if none) and c is the largest constant
/// with g(x) >= c x^n at every sample up to x0. A power n is accepted when
/// c > 0 and g(x) / x^n, probed at x_1 2^-m for m = 0..6, never falls below a
/// quarter of its value at x_1; this rejects gaps that vanish faster than x^n.
/// Throws std::domain_error for alpha <= 0.
std::optional<ShortTimeCertificate> short_time_certificate(const std::function<double(double)>& v, double alpha,
                                                           const CertificateProbe& probe = {});
std::optional<ShortTimeCertificate> short_time_certificate(const Measure1D& v, double alpha,
                                                           const CertificateProbe& probe = {});

struct BlowupEvent {
    double time;
    std::size_t step;
    double observed_jump;           ///< loss increment of the particle run
    double jump;                    ///< physical jump of the estimated pre-jump measure
    Measure1D pre;                  ///< estimated measure one step before the event
    std::optional<Measure1D> post;  ///< shifted measure, empty when nothing survives
};

struct BlowupRestartConfig {
    ParticleConfig particles;
    double threshold = 0.0;  ///< <= 0 selects 10 / N
    double delta = 0.0;      ///< <= 0 selects N^{-1/3}
    std::uint64_t restart_seed = 1;
};

struct BlowupRestartResult {
    LossPath original;
    std::optional<BlowupEvent> event;
    /// Original path up to the step before the event, then
    /// L(t*-) + (m- - m+) + m+ L'(t - t*) from the restarted system.
    std::optional<LossPath> restarted;
    double sup_gap = 0.0;  ///< max over t >= t* of |original - restarted|
    double band = 0.0;     ///< 5 / sqrt(N)
};

/// Runs the particle system, locates the first blow-up, estimates the
/// pre-jump measure from the alive particles one step before its largest
/// increment, applies the physical jump and restarts a fresh system from the
/// shifted measure with alpha m+ and round(m+ N) particles.
BlowupRestartResult blowup_restart(const BlowupRestartConfig& cfg);

}  // namespace cmv
