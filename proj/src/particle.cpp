#include "cmv/particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cmv/kernels.hpp"
#include "cmv/rng.hpp"

namespace cmv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// alpha (f(L + k/N) - f(L)); infinite once the argument reaches 1, where
// every remaining particle is absorbed.
double cascade_threshold(double alpha, const FeedbackFn& f, double l_prev, double f_prev, std::size_t k,
                         std::size_t n_total) {
    if (k == 0) return 0.0;
    const double arg = l_prev + static_cast<double>(k) / static_cast<double>(n_total);
    if (arg >= 1.0 && f.kind() == FeedbackFn::Kind::neglog) return kInf;
    return alpha * (f.eval_unchecked(std::min(arg, 1.0)) - f_prev);
}

std::size_t count_at_most(std::span<const double> sorted, double v) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

}  // namespace

void ParticleConfig::validate() const {
    if (n_particles < 1) throw std::invalid_argument("particle: N must be >= 1");
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("particle: alpha must be finite and >= 0");
    if (!feedback.nondecreasing()) throw std::invalid_argument("particle: feedback must be nondecreasing");
    if (std::abs(nu0.total_mass() - 1.0) > 1e-9) throw std::invalid_argument("particle: nu0 must be a probability measure");
    if (initial_point && !std::isfinite(*initial_point)) throw std::invalid_argument("particle: initial point must be finite");
    driver.validate(grid);
    if (density) {
        for (double t : density->times)
            if (!(t >= 0.0 && t <= grid.horizon() + 1e-12))
                throw std::invalid_argument("particle: density time outside [0, T]");
    }
}

std::vector<double> ParticleEnsemble::alive_positions() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (alive[i]) out.push_back(positions[i]);
    return out;
}

std::size_t resolve_cascade(std::span<const double> sorted_alive_positions, double alpha, std::size_t n_total,
                            const FeedbackFn& f, double l_prev) {
    const double f_prev = f.eval_unchecked(l_prev);
    std::size_t k = count_at_most(sorted_alive_positions, 0.0);
    for (;;) {
        const double thr = cascade_threshold(alpha, f, l_prev, f_prev, k, n_total);
        const std::size_t next = count_at_most(sorted_alive_positions, thr);
        if (next <= k) return k;
        k = next;
    }
}

ParticleSystem::ParticleSystem(ParticleConfig cfg) : cfg_(std::move(cfg)), n_(cfg_.n_particles) {
    cfg_.validate();
    sigma_sdt_ = cfg_.driver.idiosyncratic_scale() * std::sqrt(cfg_.grid.dt());
    offset_ = cfg_.driver.common_offset(cfg_.grid, cfg_.seed);

    carried_.resize(n_);
    const RandomStream init(cfg_.seed, kInitialStream);
    for (std::size_t i = 0; i < n_; ++i)
        carried_[i] = cfg_.initial_point ? *cfg_.initial_point : cfg_.nu0.quantile(init.uniform(i));
    spare_normal_.assign(n_, 0.0);
    alive_.assign(n_, 1);
    forced_.assign(n_, 0);
    frozen_.assign(n_, 0.0);
    default_time_.assign(n_, kInf);

    // Particles starting at or below the barrier are absorbed at time 0
    // together with whatever cascade they trigger.
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < n_; ++i) keyed.emplace_back(carried_[i] + offset_[0], i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<double> sorted(keyed.size());
    for (std::size_t j = 0; j < keyed.size(); ++j) sorted[j] = keyed[j].first;
    if (!sorted.empty() && sorted.front() <= 0.0) {
        const double f0 = cfg_.feedback.eval_unchecked(0.0);
        const std::size_t k = resolve_cascade(sorted, cfg_.alpha, n_, cfg_.feedback, 0.0);
        const double f_new = cfg_.feedback.eval_unchecked(static_cast<double>(k) / static_cast<double>(n_));
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = keyed[j].second;
            alive_[i] = 0;
            default_time_[i] = 0.0;
            frozen_[i] = keyed[j].first - cfg_.alpha * (f_new - f0);
        }
        n_dead_ = k;
    }
}

double ParticleSystem::feedback_level(double loss) const { return cfg_.alpha * cfg_.feedback.eval_unchecked(loss); }

std::size_t ParticleSystem::step() {
    if (done()) throw std::logic_error("particle: stepping past the horizon");
    if (n_dead_ == n_) {
        ++step_;
        return 0;
    }
    const std::size_t n = step_;
    const double l_prev = loss();
    const double f_prev = cfg_.feedback.eval_unchecked(l_prev);
    const double level_prev = cfg_.alpha * f_prev;
    const double off_before = offset_[n];
    const double off = offset_[n + 1];
    const std::size_t alive_count = n_ - n_dead_;

    // Cascade threshold in carried units for k absorptions.
    auto carried_threshold = [&](std::size_t k) {
        if (k == 0) return level_prev - off;
        return cascade_threshold(cfg_.alpha, cfg_.feedback, l_prev, f_prev, k, n_) + level_prev - off;
    };

    const double bridge_var =
        cfg_.brownian_bridge ? cfg_.driver.idiosyncratic_scale() * cfg_.driver.idiosyncratic_scale() +
                                   (cfg_.driver.kind == DriverSpec::Kind::brownian_plus_path ? cfg_.driver.rho * cfg_.driver.rho : 0.0)
                             : 0.0;
    const double bridge_scale = bridge_var > 0.0 ? -2.0 / (bridge_var * cfg_.grid.dt()) : 0.0;

    // Candidates are gathered under a bound that covers a modest cascade; a
    // larger cascade triggers a rescan with a wider bound.
    std::size_t slack = std::min(alive_count, std::max<std::size_t>(64, alive_count / 64));
    double bound = carried_threshold(slack);
    const bool pair_step = (n % 2 == 0);
    const bool stochastic = sigma_sdt_ != 0.0;

    candidates_.clear();
    std::vector<std::size_t> cand_idx;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!alive_[i]) continue;
        const double before = carried_[i];
        if (stochastic) {
            const RandomStream rs(cfg_.seed, path_stream(i));
            double xi;
            if (pair_step) {
                const auto [a, b] = rs.normal_pair(n / 2, kGaussianLane);
                xi = a;
                spare_normal_[i] = b;
            } else {
                xi = spare_normal_[i];
            }
            carried_[i] = before + sigma_sdt_ * xi;
        }
        const double c = carried_[i];
        if (!std::isfinite(c))
            throw std::runtime_error("particle: non-finite position for particle " + std::to_string(i) + " at step " +
                                     std::to_string(n + 1));
        forced_[i] = 0;
        if (bridge_scale != 0.0) {
            const double xb = before + off_before - level_prev;
            const double xa = c + off - level_prev;
            if (xb > 0.0 && xa > 0.0) {
                const double u = RandomStream(cfg_.seed, path_stream(i)).uniform(n, kBridgeLane);
                if (u < std::exp(bridge_scale * xb * xa)) forced_[i] = 1;
            }
        }
        if (forced_[i] || c <= bound) cand_idx.push_back(i);
    }

    auto key_of = [&](std::size_t i) { return forced_[i] ? level_prev - off : carried_[i]; };

    std::size_t k = 0;
    for (;;) {
        std::sort(cand_idx.begin(), cand_idx.end(), [&](std::size_t a, std::size_t b) {
            const double ka = key_of(a), kb = key_of(b);
            return ka < kb || (ka == kb && a < b);
        });
        candidates_.resize(cand_idx.size());
        for (std::size_t j = 0; j < cand_idx.size(); ++j) candidates_[j] = key_of(cand_idx[j]);

        k = count_at_most(candidates_, carried_threshold(0));
        bool overflow = false;
        for (;;) {
            const double thr = carried_threshold(k);
            if (thr > bound && cand_idx.size() < alive_count) {
                overflow = true;
                break;
            }
            const std::size_t next = count_at_most(candidates_, thr);
            if (next <= k) break;
            k = next;
        }
        if (!overflow) break;
        slack = std::min(alive_count, std::max(2 * slack, k + 1));
        bound = slack >= alive_count ? kInf : carried_threshold(slack);
        cand_idx.clear();
        for (std::size_t i = 0; i < n_; ++i)
            if (alive_[i] && (forced_[i] || carried_[i] <= bound)) cand_idx.push_back(i);
    }

    const double t_next = cfg_.grid.time(n + 1);
    if (k > 0) {
        const double level_new = feedback_level(static_cast<double>(n_dead_ + k) / static_cast<double>(n_));
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = cand_idx[j];
            alive_[i] = 0;
            default_time_[i] = t_next;
            frozen_[i] = (forced_[i] ? 0.0 : carried_[i] + off - level_prev) - (level_new - level_prev);
        }
        n_dead_ += k;
    }
    ++step_;
    return k;
}

std::vector<double> ParticleSystem::alive_positions() const {
    const double shift = offset_[step_] - feedback_level(loss());
    std::vector<double> out;
    out.reserve(n_alive());
    for (std::size_t i = 0; i < n_; ++i)
        if (alive_[i]) out.push_back(carried_[i] + shift);
    return out;
}

ParticleEnsemble ParticleSystem::ensemble() const {
    ParticleEnsemble e;
    const double shift = offset_[step_] - feedback_level(loss());
    e.positions.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) e.positions[i] = alive_[i] ? carried_[i] + shift : frozen_[i];
    e.alive = alive_;
    e.default_time = default_time_;
    e.n_dead = n_dead_;
    e.step = step_;
    e.time = cfg_.grid.time(step_);
    return e;
}

ParticleRun simulate_particles(const ParticleConfig& cfg) {
    ParticleSystem sys(cfg);
    const TimeGrid& grid = sys.config().grid;

    std::vector<std::size_t> snap_steps;
    double delta = 0.0;
    if (cfg.density) {
        delta = cfg.density->delta > 0.0 ? cfg.density->delta : std::cbrt(1.0 / static_cast<double>(cfg.n_particles));
        for (double t : cfg.density->times) snap_steps.push_back(grid.index_of(t));
    }
    std::vector<DensitySnapshot> snaps;
    auto take_snapshots = [&](std::size_t step) {
        for (std::size_t s : snap_steps) {
            if (s != step) continue;
            const ParticleEnsemble e = sys.ensemble();
            snaps.push_back({grid.time(step), cfg.density->xs, estimate_density(e, delta, cfg.density->xs)});
        }
    };

    std::vector<double> loss(grid.n_points(), 0.0);
    std::vector<std::size_t> absorbed(grid.n_steps(), 0);
    loss[0] = sys.loss();
    take_snapshots(0);
    while (!sys.done()) {
        const std::size_t n = sys.step_index();
        absorbed[n] = sys.step();
        loss[n + 1] = sys.loss();
        take_snapshots(n + 1);
    }
    return {LossPath(grid, std::move(loss)), sys.ensemble(), std::move(snaps), std::move(absorbed)};
}

std::vector<double> estimate_density(const ParticleEnsemble& ensemble, double delta, std::span<const double> xs) {
    WeightedPoints pts;
    const double w = 1.0 / static_cast<double>(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        if (!ensemble.alive[i]) continue;
        pts.points.push_back(ensemble.positions[i]);
        pts.weights.push_back(w);
    }
    return smooth(pts, delta, KernelKind::absorbing, xs);
}

}  // namespace cmv
