#include "cmv/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmv/kernels.hpp"
#include "cmv/pjc.hpp"

namespace cmv {

std::vector<JumpRecord> detect_jumps(const LossPath& loss, double threshold) {
    if (!(threshold > 0.0)) throw std::domain_error("detect_jumps: threshold must be > 0");
    std::vector<JumpRecord> out;
    bool open = false;
    for (std::size_t i = 1; i < loss.values.size(); ++i) {
        const double inc = loss.values[i] - loss.values[i - 1];
        if (inc > threshold) {
            if (open) {
                JumpRecord& r = out.back();
                if (inc > loss.values[r.peak_step] - loss.values[r.peak_step - 1]) r.peak_step = i;
                r.size += inc;
            } else {
                out.push_back({loss.grid.time(i), i, inc, i});
                open = true;
            }
        } else {
            open = false;
        }
    }
    return out;
}

double jump_from_density(const Measure1D& v_minus, double alpha) { return jump_size(v_minus, alpha); }

std::optional<Measure1D> restart_density(const Measure1D& v_minus, double alpha, double delta_l) {
    if (!(delta_l >= 0.0)) throw std::invalid_argument("restart_density: delta_L must be >= 0");
    const double shift = alpha * delta_l;
    if (shift == 0.0) return v_minus;
    const auto bp = v_minus.breakpoints();
    const double start = std::max(shift, bp.front());
    if (start >= bp.back()) return std::nullopt;
    const double base = v_minus.cdf(start);
    std::vector<double> xs{start - shift};
    std::vector<double> fs{0.0};
    for (double b : bp) {
        if (b <= start) continue;
        xs.push_back(b - shift);
        fs.push_back(std::max(fs.back(), v_minus.cdf(b) - base));
    }
    if (!(fs.back() > 0.0)) return std::nullopt;
    return Measure1D(std::move(xs), std::move(fs));
}

Measure1D measure_from_density_samples(std::span<const double> xs, std::span<const double> values,
                                       std::optional<double> target_mass) {
    if (xs.size() != values.size() || xs.size() < 2)
        throw std::invalid_argument("density samples: need at least two (x, V) pairs");
    std::vector<double> bps(xs.begin(), xs.end());
    std::vector<double> cdf(xs.size(), 0.0);
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
        const double v = 0.5 * (std::max(0.0, values[j]) + std::max(0.0, values[j + 1]));
        cdf[j + 1] = cdf[j] + v * (xs[j + 1] - xs[j]);
    }
    const double mass = cdf.back();
    if (!(mass > 0.0)) throw std::invalid_argument("density samples: no mass");
    double scale = 1.0;
    if (target_mass) scale = *target_mass / mass;
    else if (mass > 1.0) scale = 1.0 / mass;
    if (scale != 1.0)
        for (double& c : cdf) c *= scale;
    if (cdf.back() > 1.0) cdf.back() = 1.0;
    return Measure1D(std::move(bps), std::move(cdf));
}

Measure1D smoothed_empirical_measure(std::span<const double> points, double weight, double delta, double cell) {
    if (points.empty()) throw std::invalid_argument("smoothed measure: no points");
    if (!(delta > 0.0) || !(cell > 0.0)) throw std::invalid_argument("smoothed measure: delta and cell must be > 0");
    const double sigma = std::sqrt(delta);
    const double hi_point = *std::max_element(points.begin(), points.end());
    const double bin = std::min(cell, 0.05 * sigma);

    // Bin the points first; each bin contributes one atom at its mean.
    const auto nbins = static_cast<std::size_t>(std::ceil(std::max(hi_point, 0.0) / bin)) + 1;
    std::vector<double> sum(nbins, 0.0), count(nbins, 0.0);
    for (double p : points) {
        const double q = std::max(p, 0.0);
        const auto b = std::min(nbins - 1, static_cast<std::size_t>(q / bin));
        sum[b] += q;
        count[b] += 1.0;
    }
    WeightedPoints atoms;
    for (std::size_t b = 0; b < nbins; ++b) {
        if (count[b] == 0.0) continue;
        atoms.points.push_back(sum[b] / count[b]);
        atoms.weights.push_back(weight * count[b]);
    }

    const double x_end = std::max(hi_point, 0.0) + 8.0 * sigma;
    const auto ncells = static_cast<std::size_t>(std::ceil(x_end / cell));
    std::vector<double> xs(ncells + 1), mids(ncells);
    for (std::size_t j = 0; j <= ncells; ++j) xs[j] = static_cast<double>(j) * cell;
    for (std::size_t j = 0; j < ncells; ++j) mids[j] = (static_cast<double>(j) + 0.5) * cell;
    const std::vector<double> dens = smooth(atoms, delta, KernelKind::reflecting, mids);
    std::vector<double> cdf(ncells + 1, 0.0);
    for (std::size_t j = 0; j < ncells; ++j) cdf[j + 1] = cdf[j] + std::max(0.0, dens[j]) * cell;
    const double target = std::min(1.0, weight * static_cast<double>(points.size()));
    const double scale = target / cdf.back();
    for (double& c : cdf) c *= scale;
    cdf.back() = target;
    for (std::size_t j = 1; j < cdf.size(); ++j) cdf[j] = std::max(cdf[j], cdf[j - 1]);
    return Measure1D(std::move(xs), std::move(cdf));
}

std::optional<ShortTimeCertificate> short_time_certificate(const std::function<double(double)>& v, double alpha,
                                                           const CertificateProbe& probe) {
    if (!(alpha > 0.0)) throw std::domain_error("short_time_certificate: alpha must be > 0");
    if (probe.samples < 1 || !(probe.x_max > 0.0)) throw std::invalid_argument("short_time_certificate: bad probe");
    const double h = probe.x_max / static_cast<double>(probe.samples);
    auto gap = [&](double x) { return 1.0 / alpha - v(x); };

    std::vector<double> xs, gs;
    double x0 = probe.x_max;
    for (std::size_t k = 1; k <= probe.samples; ++k) {
        const double x = static_cast<double>(k) * h;
        const double g = gap(x);
        if (g <= 0.0) {
            x0 = x;
            break;
        }
        xs.push_back(x);
        gs.push_back(g);
    }
    if (xs.empty()) return std::nullopt;

    for (int n = 1; n <= 8; ++n) {
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < xs.size(); ++k) c = std::min(c, gs[k] / std::pow(xs[k], n));
        if (!(c > 0.0) || !std::isfinite(c)) continue;
        const double r1 = gs[0] / std::pow(xs[0], n);
        bool ok = true;
        for (int m = 1; m <= 6 && ok; ++m) {
            const double x = xs[0] * std::ldexp(1.0, -m);
            const double r = gap(x) / std::pow(x, n);
            if (!(r >= 0.25 * r1)) ok = false;
        }
        if (ok) return ShortTimeCertificate{c, n, x0};
    }
    return std::nullopt;
}

std::optional<ShortTimeCertificate> short_time_certificate(const Measure1D& v, double alpha,
                                                           const CertificateProbe& probe) {
    return short_time_certificate([&v](double x) { return v.density(x); }, alpha, probe);
}

BlowupRestartResult blowup_restart(const BlowupRestartConfig& cfg) {
    const ParticleConfig& pc = cfg.particles;
    if (pc.feedback.kind() != FeedbackFn::Kind::linear)
        throw std::invalid_argument("blowup_restart: only linear feedback is supported");
    if (pc.driver.kind != DriverSpec::Kind::brownian || pc.driver.drift)
        throw std::invalid_argument("blowup_restart: only the plain Brownian driver is supported");

    const double n = static_cast<double>(pc.n_particles);
    const double threshold = cfg.threshold > 0.0 ? cfg.threshold : 10.0 / n;
    const double delta = cfg.delta > 0.0 ? cfg.delta : std::cbrt(1.0 / n);

    ParticleConfig plain = pc;
    plain.density.reset();
    const ParticleRun run = simulate_particles(plain);
    BlowupRestartResult res{run.loss, std::nullopt, std::nullopt, 0.0, 5.0 / std::sqrt(n)};

    const auto jumps = detect_jumps(run.loss, threshold);
    if (jumps.empty()) return res;
    const JumpRecord& j = jumps.front();
    const TimeGrid& grid = run.loss.grid;
    const std::size_t s = j.peak_step;

    // State one step before the event (the run is deterministic).
    ParticleSystem sys(plain);
    while (sys.step_index() + 1 < s) sys.step();
    const std::vector<double> alive = sys.alive_positions();
    const double l_before = sys.loss();
    if (alive.empty()) return res;

    const double cell = std::min(1e-3, std::sqrt(delta) / 16.0);
    Measure1D pre = smoothed_empirical_measure(alive, 1.0 / n, delta, cell);
    const double jump = jump_from_density(pre, pc.alpha);
    std::optional<Measure1D> post = restart_density(pre, pc.alpha, jump);
    res.event = BlowupEvent{grid.time(s), s, run.loss.values[s] - run.loss.values[s - 1], jump, pre, post};

    const double m_minus = pre.total_mass();
    const double m_plus = post ? post->total_mass() : 0.0;
    const std::size_t start = s - 1;
    std::vector<double> values(run.loss.values.begin(), run.loss.values.begin() + static_cast<std::ptrdiff_t>(start));
    const double level = l_before + (m_minus - m_plus);
    const auto n_restart = static_cast<std::size_t>(std::llround(m_plus * n));

    if (post && n_restart >= 1 && start < grid.n_steps()) {
        std::vector<double> bps(post->breakpoints().begin(), post->breakpoints().end());
        std::vector<double> cdf(post->cdf_values().begin(), post->cdf_values().end());
        for (double& c : cdf) c /= m_plus;
        cdf.back() = 1.0;
        ParticleConfig rc;
        rc.n_particles = n_restart;
        rc.alpha = pc.alpha * m_plus;
        rc.feedback = pc.feedback;
        rc.nu0 = Measure1D(std::move(bps), std::move(cdf));
        rc.grid = TimeGrid(grid.horizon() - grid.time(start), grid.dt());
        rc.seed = cfg.restart_seed;
        rc.brownian_bridge = pc.brownian_bridge;
        const ParticleRun cont = simulate_particles(rc);
        for (double l : cont.loss.values) values.push_back(std::min(1.0, level + m_plus * l));
    } else {
        values.resize(grid.n_points(), std::min(1.0, level));
    }
    values.resize(grid.n_points(), values.back());
    for (std::size_t i = 1; i < values.size(); ++i) values[i] = std::max(values[i], values[i - 1]);
    res.restarted = LossPath(grid, std::move(values));

    for (std::size_t i = s; i < grid.n_points(); ++i)
        res.sup_gap = std::max(res.sup_gap, std::abs(run.loss.values[i] - res.restarted->values[i]));
    return res;
}

}  // namespace cmv
