#include "cmv/mv_fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cmv {

namespace {

struct Block {
    std::size_t begin;
    std::size_t end;
};

std::vector<Block> blocks_of(std::size_t m) {
    const std::size_t nb = std::min(m, kGammaBatches);
    std::vector<Block> out;
    for (std::size_t b = 0; b < nb; ++b) out.push_back({b * m / nb, (b + 1) * m / nb});
    return out;
}

void check_grid(const LossPath& loss, const DriverEnsemble& drivers) {
    if (!(loss.grid == drivers.grid())) throw std::invalid_argument("loss path and drivers are on different grids");
}

// alpha f(L_s) for every grid point, computed once per Gamma evaluation.
std::vector<double> feedback_levels(const LossPath& loss, const FeedbackFn& f, double alpha) {
    std::vector<double> lv(loss.values.size());
    for (std::size_t i = 0; i < lv.size(); ++i) lv[i] = alpha * f.eval_unchecked(loss.values[i]);
    return lv;
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

DriverEnsemble DriverEnsemble::generate(const DriverSpec& spec, const TimeGrid& grid, std::size_t m,
                                        std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("driver ensemble: M must be >= 1");
    spec.validate(grid);
    DriverEnsemble e(grid, m);
    e.prov_ = {seed, spec.kind, spec.rho, false};
    const std::size_t np = grid.n_points();
    e.data_.assign(m * np, 0.0);
    const std::vector<double> offset = spec.common_offset(grid, seed);
    const double scale = spec.idiosyncratic_scale();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sj = 0; sj < static_cast<std::ptrdiff_t>(m); ++sj) {
        const auto j = static_cast<std::size_t>(sj);
        double* row = e.data_.data() + j * np;
        if (scale != 0.0) {
            const std::vector<double> w = brownian_path(grid, RandomStream(seed, path_stream(j)));
            for (std::size_t i = 0; i < np; ++i) row[i] = scale * w[i] + offset[i];
        } else {
            std::copy(offset.begin(), offset.end(), row);
        }
    }
    return e;
}

DriverEnsemble DriverEnsemble::from_paths(const TimeGrid& grid, const std::vector<std::vector<double>>& paths) {
    if (paths.empty()) throw std::invalid_argument("driver ensemble: no paths");
    DriverEnsemble e(grid, paths.size());
    e.prov_.supplied_paths = true;
    e.data_.reserve(paths.size() * grid.n_points());
    for (const auto& p : paths) {
        if (p.size() != grid.n_points()) throw std::invalid_argument("driver ensemble: path length does not match grid");
        if (p.front() != 0.0) throw std::invalid_argument("driver ensemble: paths must start at 0");
        e.data_.insert(e.data_.end(), p.begin(), p.end());
    }
    return e;
}

std::vector<double> sup_functional(const LossPath& loss, const FeedbackFn& f, double alpha, std::span<const double> z) {
    if (z.size() != loss.values.size()) throw std::invalid_argument("sup_functional: path length mismatch");
    std::vector<double> m(z.size());
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i) {
        run = std::max(run, alpha * f.eval_unchecked(loss.values[i]) - z[i]);
        m[i] = run;
    }
    return m;
}

GammaResult gamma_map_batched(const LossPath& loss, const DriverEnsemble& drivers, const Measure1D& nu0, double alpha,
                              const FeedbackFn& f) {
    check_grid(loss, drivers);
    const std::size_t np = loss.values.size();
    const std::vector<double> lv = feedback_levels(loss, f, alpha);
    const std::vector<Block> blocks = blocks_of(drivers.size());
    std::vector<std::vector<double>> sums(blocks.size(), std::vector<double>(np, 0.0));

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sb = 0; sb < static_cast<std::ptrdiff_t>(blocks.size()); ++sb) {
        const auto b = static_cast<std::size_t>(sb);
        std::vector<double>& acc = sums[b];
        for (std::size_t j = blocks[b].begin; j < blocks[b].end; ++j) {
            const auto z = drivers.path(j);
            double run = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < np; ++i) {
                run = std::max(run, lv[i] - z[i]);
                acc[i] += nu0.cdf(run);
            }
        }
    }

    std::vector<double> total(np, 0.0);
    for (const auto& s : sums)
        for (std::size_t i = 0; i < np; ++i) total[i] += s[i];
    const double inv_m = 1.0 / static_cast<double>(drivers.size());
    for (double& v : total) v = std::min(1.0, v * inv_m);

    std::vector<std::vector<double>> batches(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double inv = 1.0 / static_cast<double>(blocks[b].end - blocks[b].begin);
        batches[b].resize(np);
        for (std::size_t i = 0; i < np; ++i) batches[b][i] = sums[b][i] * inv;
    }
    return {LossPath(loss.grid, std::move(total)), std::move(batches)};
}

LossPath gamma_map(const LossPath& loss, const DriverEnsemble& drivers, const Measure1D& nu0, double alpha,
                   const FeedbackFn& f) {
    return gamma_map_batched(loss, drivers, nu0, alpha, f).loss;
}

bool PicardDiagnostics::contraction_holds(double q) const {
    for (std::size_t k = 0; k + 1 < distances.size(); ++k)
        if (distances[k + 1] > q * distances[k] + 3.0 * standard_errors[k + 1]) return false;
    return true;
}

PicardResult solve_picard(const PicardConfig& cfg, const DriverEnsemble& drivers) {
    const TimeGrid& grid = drivers.grid();
    std::vector<double> guess = cfg.initial_guess ? *cfg.initial_guess : std::vector<double>(grid.n_points(), 0.0);
    if (guess.size() != grid.n_points()) throw std::invalid_argument("picard: initial guess length does not match grid");
    LossPath current(grid, std::move(guess));
    const double l0_terminal = current.terminal();

    PicardDiagnostics diag;
    GammaResult next = gamma_map_batched(current, drivers, cfg.nu0, cfg.alpha, cfg.f);
    std::vector<std::vector<double>> prev_batches;
    std::optional<LossPath> best;
    double best_d = std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k <= cfg.max_iter; ++k) {
        const double d = sup_distance(next.loss.values, current.values);
        std::vector<double> batch_d;
        if (k == 0) {
            for (const auto& b : next.batches) batch_d.push_back(sup_distance(b, current.values));
        } else {
            for (std::size_t b = 0; b < next.batches.size(); ++b)
                batch_d.push_back(sup_distance(next.batches[b], prev_batches[b]));
        }
        diag.distances.push_back(d);
        diag.standard_errors.push_back(sample_sd(batch_d) / std::sqrt(static_cast<double>(batch_d.size())));
        if (k > 0) {
            const double dp = diag.distances[k - 1];
            diag.ratios.push_back(dp > 0.0 ? d / dp : std::numeric_limits<double>::quiet_NaN());
        }
        if (d < best_d) {
            best_d = d;
            best = next.loss;
        }
        current = next.loss;
        prev_batches = std::move(next.batches);
        if (d < cfg.tol) {
            diag.converged = true;
            diag.iterations = k;
            break;
        }
        diag.iterations = k;
        if (k == cfg.max_iter) break;
        next = gamma_map_batched(current, drivers, cfg.nu0, cfg.alpha, cfg.f);
    }

    diag.certificate = contraction_certificate(cfg.alpha, cfg.nu0, cfg.f, current.terminal(), l0_terminal);
    if (!(diag.certificate < 1.0))
        diag.warning = "contraction certificate " + std::to_string(diag.certificate) +
                       " >= 1: weak feedback regime not certified";
    if (diag.converged) return {current, diag};
    return {*best, diag};
}

ComparisonGap comparison_gap(const LossPath& loss, const LossPath& loss_bar, const DriverEnsemble& drivers,
                             const Measure1D& nu0, double alpha, const FeedbackFn& f) {
    check_grid(loss, drivers);
    check_grid(loss_bar, drivers);
    const std::size_t np = loss.values.size();
    const std::vector<double> lv = feedback_levels(loss, f, alpha);
    const std::vector<double> lvb = feedback_levels(loss_bar, f, alpha);
    const std::vector<Block> blocks = blocks_of(drivers.size());
    // Per block: signed difference, mass of (Mbar, M] and mass of (M, Mbar].
    std::vector<std::vector<double>> diff(blocks.size(), std::vector<double>(np, 0.0));
    std::vector<std::vector<double>> up(blocks.size(), std::vector<double>(np, 0.0));
    std::vector<std::vector<double>> down(blocks.size(), std::vector<double>(np, 0.0));

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sb = 0; sb < static_cast<std::ptrdiff_t>(blocks.size()); ++sb) {
        const auto b = static_cast<std::size_t>(sb);
        for (std::size_t j = blocks[b].begin; j < blocks[b].end; ++j) {
            const auto z = drivers.path(j);
            double m = -std::numeric_limits<double>::infinity();
            double mb = m;
            for (std::size_t i = 0; i < np; ++i) {
                m = std::max(m, lv[i] - z[i]);
                mb = std::max(mb, lvb[i] - z[i]);
                const double u = nu0.interval_mass(mb, m);
                const double w = nu0.interval_mass(m, mb);
                diff[b][i] += (m >= mb) ? nu0.cdf(m) - nu0.cdf(mb) : -(nu0.cdf(mb) - nu0.cdf(m));
                up[b][i] += u;
                down[b][i] += w;
            }
        }
    }

    ComparisonGap g;
    const double inv_m = 1.0 / static_cast<double>(drivers.size());
    for (std::size_t i = 0; i < np; ++i) {
        double sd = 0.0, su = 0.0, sw = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            sd += diff[b][i];
            su += up[b][i];
            sw += down[b][i];
        }
        g.lhs = std::max(g.lhs, std::abs(sd) * inv_m);
        g.rhs = std::max(g.rhs, std::max(su, sw) * inv_m);
    }
    return g;
}

double contraction_certificate(double alpha, const Measure1D& nu0, const FeedbackFn& f, double l_terminal,
                               double lbar_terminal) {
    const double x = std::max(l_terminal, lbar_terminal);
    double lip;
    if (x < 1.0) {
        lip = f.lipschitz(std::max(0.0, x));
    } else if (f.kind() == FeedbackFn::Kind::neglog) {
        return std::numeric_limits<double>::infinity();
    } else {
        lip = f.lipschitz(std::nextafter(1.0, 0.0));
    }
    return std::abs(alpha) * nu0.sup_density() * lip;
}

std::optional<double> uniqueness_horizon(const LossPath& loss, double alpha, double sup_density) {
    const double q = alpha * sup_density;
    if (!(q < 1.0)) throw std::domain_error("uniqueness_horizon: alpha * sup_density must be < 1");
    const double threshold = 1.0 - q;
    for (std::size_t i = 0; i < loss.values.size(); ++i)
        if (loss.values[i] >= threshold) return loss.grid.time(i);
    return std::nullopt;
}

std::vector<double> nonphysical_drift(const Measure1D& nu0, double alpha, const TimeGrid& grid) {
    std::vector<double> a(grid.n_points(), 0.0);
    const auto bp = nu0.breakpoints();
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double s = std::sqrt(2.0 * grid.time(i));
        auto hit = [s](double x0) { return std::erfc(x0 / s); };  // 2 Phi(-x0 / sqrt t)
        double acc = 0.0;
        for (std::size_t j = 0; j < nu0.segments(); ++j) {
            const double w = nu0.slope(j);
            if (w == 0.0) continue;
            acc += w * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(hit, bp[j], bp[j + 1], 15, 1e-13);
        }
        a[i] = alpha * std::min(acc, 1.0);
    }
    // Quadrature noise must not break monotonicity in t.
    for (std::size_t i = 1; i < a.size(); ++i) a[i] = std::max(a[i], a[i - 1]);
    return a;
}

}  // namespace cmv
