#include "cmv/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmv/blowup.hpp"
#include "cmv/mv_fixed_point.hpp"
#include "cmv/particle.hpp"
#include "cmv/pde.hpp"
#include "cmv/pjc.hpp"

namespace cmv {

namespace {

json nan_to_null(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        if (std::isfinite(x))
            a.push_back(x);
        else
            a.push_back(nullptr);
    }
    return a;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Outcome {
    int code = kExitOk;
    json extra = json::object();
};

ParticleConfig particle_config(const RunConfig& cfg) {
    ParticleConfig pc;
    pc.n_particles = cfg.n_particles;
    pc.alpha = cfg.alpha;
    pc.feedback = cfg.f;
    pc.nu0 = cfg.nu0;
    pc.grid = cfg.grid;
    pc.driver = cfg.driver;
    pc.seed = cfg.seed;
    pc.initial_point = cfg.initial_point;
    pc.brownian_bridge = cfg.brownian_bridge;
    if (cfg.density) pc.density = DensityEstimation{cfg.density->delta, cfg.density->times, cfg.density->xs};
    return pc;
}

void write_long_density(const std::string& path, const std::vector<double>& times,
                        const std::vector<std::vector<double>>& xs, const std::vector<std::vector<double>>& values) {
    std::vector<double> t, x, v;
    for (std::size_t s = 0; s < times.size(); ++s) {
        for (std::size_t j = 0; j < xs[s].size(); ++j) {
            t.push_back(times[s]);
            x.push_back(xs[s][j]);
            v.push_back(values[s][j]);
        }
    }
    write_csv(path, {"t", "x", "V"}, {t, x, v});
}

Outcome run_simulate(const RunConfig& cfg, std::ostream& out) {
    const ParticleRun run = simulate_particles(particle_config(cfg));
    if (!cfg.outputs.out.empty()) write_csv(cfg.outputs.out, {"t", "L"}, {cfg.grid.times(), run.loss.values});
    if (!cfg.outputs.density_out.empty()) {
        std::vector<double> times;
        std::vector<std::vector<double>> xs, vs;
        for (const auto& s : run.snapshots) {
            times.push_back(s.time);
            xs.push_back(s.xs);
            vs.push_back(s.values);
        }
        write_long_density(cfg.outputs.density_out, times, xs, vs);
    }
    out << "L(T) = " << format_shortest(run.loss.terminal()) << '\n';
    return {kExitOk, {{"terminal_loss", run.loss.terminal()}}};
}

json diagnostics_json(const PicardDiagnostics& d) {
    json j{{"distances", nan_to_null(d.distances)},
           {"standard_errors", nan_to_null(d.standard_errors)},
           {"ratios", nan_to_null(d.ratios)},
           {"certificate", number_or_null(d.certificate)},
           {"converged", d.converged},
           {"iterations", d.iterations}};
    if (d.warning) j["warning"] = *d.warning;
    return j;
}

Outcome run_solve_mv(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const DriverEnsemble drivers = DriverEnsemble::generate(cfg.driver, cfg.grid, cfg.m_paths, cfg.seed);
    PicardConfig pc{cfg.nu0, cfg.alpha, cfg.f, cfg.tol, cfg.max_iter, cfg.initial_guess};
    const PicardResult res = solve_picard(pc, drivers);
    if (!cfg.outputs.out.empty()) write_csv(cfg.outputs.out, {"t", "L"}, {cfg.grid.times(), res.loss.values});
    const json diag = diagnostics_json(res.diagnostics);
    if (!cfg.outputs.diag.empty()) write_text(cfg.outputs.diag, diag.dump(2) + "\n");
    if (res.diagnostics.warning) err << "warning: " << *res.diagnostics.warning << '\n';
    out << "converged: " << (res.diagnostics.converged ? "true" : "false")
        << ", iterations " << res.diagnostics.iterations << ", certificate "
        << format_shortest(res.diagnostics.certificate) << '\n';
    return {kExitOk, {{"converged", res.diagnostics.converged}}};
}

Outcome run_solve_pde(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    PdeConfig pc = PdeConfig::from_measure(cfg.nu0, cfg.alpha, cfg.grid, cfg.pde.dx);
    pc.x_max = cfg.pde.x_max;
    pc.inner_corrections = cfg.pde.inner_corrections;
    pc.snapshot_times = cfg.pde.snapshot_times;
    pc.explosion_window = cfg.pde.explosion_window;
    pc.explosion_cap = cfg.pde.explosion_cap;
    const PdeResult res = solve_pde(pc);
    if (!cfg.outputs.out.empty()) {
        std::vector<double> flux(res.flux.begin(), res.flux.begin() + static_cast<std::ptrdiff_t>(res.loss.values.size()));
        write_csv(cfg.outputs.out, {"t", "L", "flux"}, {res.loss.grid.times(), res.loss.values, flux});
    }
    if (!cfg.outputs.snapshots.empty()) {
        std::vector<double> times;
        std::vector<std::vector<double>> xs, vs;
        for (const auto& s : res.snapshots) {
            times.push_back(s.time);
            std::vector<double> x(s.values.size());
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = static_cast<double>(j) * cfg.pde.dx;
            xs.push_back(std::move(x));
            vs.push_back(s.values);
        }
        write_long_density(cfg.outputs.snapshots, times, xs, vs);
    }
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    Outcome o;
    o.extra["max_mass_balance_error"] = res.max_mass_balance_error;
    if (res.explosion_suspected) {
        o.code = kExitNumerical;
        o.extra["explosion_time"] = *res.explosion_time;
        err << "explosion suspected at t=" << format_shortest(*res.explosion_time) << '\n';
    }
    out << "L(" << format_shortest(res.loss.grid.horizon()) << ") = " << format_shortest(res.loss.terminal()) << '\n';
    return o;
}

Outcome run_jump_size(const RunConfig& cfg, std::ostream& out) {
    const double jump = jump_size_general({cfg.nu0, cfg.alpha, cfg.f, cfg.l_minus});
    out << "jump_size: " << format_shortest(jump) << '\n';
    const json j{{"jump_size", jump}, {"alpha", cfg.alpha}, {"l_minus", cfg.l_minus}};
    if (!cfg.outputs.out.empty()) write_text(cfg.outputs.out, j.dump(2) + "\n");
    return {kExitOk, j};
}

Outcome run_check_regime(const RunConfig& cfg, std::ostream& out) {
    const double q = contraction_certificate(cfg.alpha, cfg.nu0, cfg.f, cfg.loss_bound, cfg.loss_bound);
    const bool weak = q < 1.0;
    out << "weak-feedback: " << (weak ? "true" : "false") << ", certificate " << format_shortest(q) << '\n';
    json j{{"weak_feedback", weak}, {"certificate", number_or_null(q)}};
    if (cfg.alpha > 0.0 && cfg.f.nondecreasing() && cfg.l_minus == 0.0) {
        const bool adm = check_initial_admissible(cfg.nu0, cfg.alpha, cfg.f);
        out << "initial-admissible: " << (adm ? "true" : "false") << '\n';
        j["initial_admissible"] = adm;
    }
    if (!cfg.outputs.out.empty()) write_text(cfg.outputs.out, j.dump(2) + "\n");
    return {kExitOk, j};
}

// Random nondecreasing path with values in [0, level].
std::vector<double> random_loss(const TimeGrid& grid, const RandomStream& rs, std::uint64_t base) {
    const std::size_t np = grid.n_points();
    std::vector<double> v(np, 0.0);
    const double level = rs.uniform(base);
    double acc = 0.0;
    std::vector<double> inc(np, 0.0);
    for (std::size_t i = 1; i < np; ++i) {
        const double u = rs.uniform(base + i);
        inc[i] = u * u * u;
        acc += inc[i];
    }
    double run = 0.0;
    for (std::size_t i = 1; i < np; ++i) {
        run += inc[i];
        v[i] = std::min(level, level * run / acc);
    }
    return v;
}

Outcome run_verify_comparison(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const DriverEnsemble drivers = DriverEnsemble::generate(cfg.driver, cfg.grid, cfg.m_paths, cfg.seed);
    const RandomStream rs(cfg.seed, kAuxiliaryStream);
    const std::uint64_t stride = 2 * cfg.grid.n_points();
    std::vector<double> idx, lhs, rhs;
    std::size_t violations = 0;
    out << "pair,lhs,rhs,holds\n";
    for (std::size_t p = 0; p < cfg.pairs; ++p) {
        const LossPath l(cfg.grid, random_loss(cfg.grid, rs, 2 * p * stride));
        const LossPath lb(cfg.grid, random_loss(cfg.grid, rs, (2 * p + 1) * stride));
        const ComparisonGap g = comparison_gap(l, lb, drivers, cfg.nu0, cfg.alpha, cfg.f);
        const bool holds = g.lhs <= g.rhs;
        if (!holds) ++violations;
        out << p << ',' << format_17(g.lhs) << ',' << format_17(g.rhs) << ',' << (holds ? "true" : "false") << '\n';
        idx.push_back(static_cast<double>(p));
        lhs.push_back(g.lhs);
        rhs.push_back(g.rhs);
    }
    if (!cfg.outputs.out.empty()) write_csv(cfg.outputs.out, {"pair", "lhs", "rhs"}, {idx, lhs, rhs});
    if (violations > 0) err << "comparison inequality violated on " << violations << " pairs\n";
    return {violations > 0 ? kExitNumerical : kExitOk, {{"violations", violations}}};
}

Outcome run_nonphysical(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.f.kind() != FeedbackFn::Kind::linear) {
        err << "nonphysical: only f = linear is supported\n";
        return {kExitConfig, {}};
    }
    const std::vector<double> a = nonphysical_drift(cfg.nu0, cfg.alpha, cfg.grid);
    DriverSpec spec;
    spec.drift = a;
    const DriverEnsemble drivers = DriverEnsemble::generate(spec, cfg.grid, cfg.m_paths, cfg.seed);
    std::vector<double> cand(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) cand[i] = std::clamp(a[i] / cfg.alpha, 0.0, 1.0);
    const LossPath l(cfg.grid, cand);
    const LossPath g = gamma_map(l, drivers, cfg.nu0, cfg.alpha, cfg.f);
    const double residual = sup_distance(g.values, l.values);
    const double bound = 4.0 / std::sqrt(static_cast<double>(cfg.m_paths)) + 5.0 * std::sqrt(cfg.grid.dt());
    out << "residual: " << format_shortest(residual) << ", bound " << format_shortest(bound) << '\n';
    json j{{"residual", residual}, {"bound", bound}};
    if (cfg.alpha > 0.0) {
        const bool adm = check_initial_admissible(cfg.nu0, cfg.alpha, cfg.f);
        out << "initial-admissible: " << (adm ? "true" : "false") << '\n';
        j["initial_admissible"] = adm;
    }
    if (!cfg.outputs.out.empty())
        write_csv(cfg.outputs.out, {"t", "A", "L", "GammaL"}, {cfg.grid.times(), a, l.values, g.values});
    return {kExitOk, j};
}

Outcome run_blowup_restart(const RunConfig& cfg, std::ostream& out) {
    BlowupRestartConfig bc;
    bc.particles = particle_config(cfg);
    bc.particles.density.reset();
    bc.threshold = cfg.blowup.threshold;
    bc.delta = cfg.blowup.delta;
    bc.restart_seed = cfg.blowup.restart_seed;
    const BlowupRestartResult res = blowup_restart(bc);
    json j{{"band", res.band}, {"sup_gap", res.sup_gap}};
    if (res.event) {
        j["event"] = {{"time", res.event->time},
                      {"observed_jump", res.event->observed_jump},
                      {"jump", res.event->jump},
                      {"pre_mass", res.event->pre.total_mass()},
                      {"post_mass", res.event->post ? res.event->post->total_mass() : 0.0}};
        out << "blow-up at t=" << format_shortest(res.event->time) << ", observed jump "
            << format_shortest(res.event->observed_jump) << ", physical jump " << format_shortest(res.event->jump)
            << ", sup gap " << format_shortest(res.sup_gap) << " (band " << format_shortest(res.band) << ")\n";
    } else {
        out << "no blow-up detected\n";
    }
    if (!cfg.outputs.out.empty()) {
        const std::vector<double> restarted = res.restarted ? res.restarted->values : res.original.values;
        write_csv(cfg.outputs.out, {"t", "L_original", "L_restarted"}, {cfg.grid.times(), res.original.values, restarted});
    }
    if (!cfg.outputs.diag.empty()) write_text(cfg.outputs.diag, j.dump(2) + "\n");
    return {kExitOk, j};
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const json& doc) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf;
}

int configure_threads(std::optional<int> requested) {
    std::optional<int> n = requested;
    if (!n) {
        if (const char* env = std::getenv("CMV_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) n = v;
        }
    }
#ifdef _OPENMP
    if (n) omp_set_num_threads(*n);
    return omp_get_max_threads();
#else
    return 1;
#endif
}

json unwrap_manifest(const json& doc) {
    if (doc.is_object() && doc.contains("config") && doc.contains("config_hash")) return doc.at("config");
    return doc;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        switch (cfg.scenario) {
            case Scenario::simulate: o = run_simulate(cfg, out); break;
            case Scenario::solve_mv: o = run_solve_mv(cfg, out, err); break;
            case Scenario::solve_pde: o = run_solve_pde(cfg, out, err); break;
            case Scenario::jump_size: o = run_jump_size(cfg, out); break;
            case Scenario::check_regime: o = run_check_regime(cfg, out); break;
            case Scenario::verify_comparison: o = run_verify_comparison(cfg, out, err); break;
            case Scenario::nonphysical: o = run_nonphysical(cfg, out, err); break;
            case Scenario::blowup_restart: o = run_blowup_restart(cfg, out); break;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        o.code = kExitConfig;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        o.code = kExitConfig;
    } catch (const std::runtime_error& e) {
        err << "numerical abort: " << e.what() << '\n';
        o.code = kExitNumerical;
        o.extra["abort"] = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.outputs.out.empty()) {
        json m{{"version", kVersion},
               {"scenario", to_string(cfg.scenario)},
               {"seed", cfg.seed},
               {"config_hash", config_hash(cfg.source)},
               {"config", cfg.source},
               {"threads", configure_threads(std::nullopt)},
               {"wall_time_s", wall},
               {"exit_code", o.code},
               {"result", o.extra}};
        try {
            write_text(cfg.outputs.out + ".manifest.json", m.dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            if (o.code == kExitOk) o.code = kExitConfig;
        }
    }
    return o.code;
}

int run_blowup_events(const std::string& loss_csv, const std::string& density_csv, double alpha, double threshold,
                      const std::string& out_path, std::ostream& out, std::ostream& err) {
    try {
        const CsvTable lt = read_csv(loss_csv);
        const auto& t = lt.column("t");
        const auto& l = lt.column("L");
        if (t.size() < 2) throw std::invalid_argument("loss csv needs at least two rows");
        const double dt = t[1] - t[0];
        const TimeGrid grid(t.back(), dt);
        if (grid.n_points() != l.size()) throw std::invalid_argument("loss csv is not on a uniform grid");
        const LossPath path(grid, l);
        const double thr = threshold > 0.0 ? threshold : 0.02;
        const auto jumps = detect_jumps(path, thr);

        std::optional<CsvTable> dens;
        if (!density_csv.empty()) dens = read_csv(density_csv);
        json events = json::array();
        for (const auto& j : jumps) {
            json e{{"time", j.time}, {"size", j.size}};
            if (dens && alpha > 0.0) {
                const auto& dtimes = dens->column("t");
                const auto& dx = dens->column("x");
                const auto& dv = dens->column("V");
                // Latest snapshot strictly before the jump.
                double snap = -std::numeric_limits<double>::infinity();
                for (double s : dtimes)
                    if (s < j.time && s > snap) snap = s;
                if (std::isfinite(snap)) {
                    std::vector<double> xs, vs;
                    for (std::size_t k = 0; k < dtimes.size(); ++k)
                        if (dtimes[k] == snap && dx[k] >= 0.0) {
                            xs.push_back(dx[k]);
                            vs.push_back(dv[k]);
                        }
                    if (xs.size() >= 2) {
                        const Measure1D pre = measure_from_density_samples(xs, vs);
                        e["snapshot_time"] = snap;
                        e["physical_jump"] = jump_from_density(pre, alpha);
                    }
                }
            }
            events.push_back(e);
        }
        const json doc{{"threshold", thr}, {"events", events}};
        if (out_path.empty())
            out << doc.dump(2) << '\n';
        else
            write_text(out_path, doc.dump(2) + "\n");
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

int run_restart(const std::string& measure_json, double alpha, std::optional<double> jump, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
    try {
        const Measure1D pre = measure_from_json(json::parse(read_text(measure_json)));
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
        const double d = jump ? *jump : jump_from_density(pre, alpha);
        const auto post = restart_density(pre, alpha, d);
        json doc{{"jump", d}, {"alpha", alpha}};
        doc["measure"] = post ? to_json(*post) : json(nullptr);
        if (out_path.empty())
            out << doc.dump(2) << '\n';
        else
            write_text(out_path, doc.dump(2) + "\n");
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace cmv
