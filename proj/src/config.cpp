#include "cmv/config.hpp"

#include <cmath>
#include <functional>
#include <set>

namespace cmv {

namespace {

std::string join(const std::vector<std::string>& errors) {
    std::string s;
    for (const auto& e : errors) {
        if (!s.empty()) s += "; ";
        s += e;
    }
    return s;
}

// Collects errors instead of stopping at the first one.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(std::string msg) { errors_.push_back(std::move(msg)); }

    void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
        for (const auto& [key, _] : obj.items())
            if (!allowed.count(key)) error("unknown field: " + prefix + key);
    }

    template <typename T>
    std::optional<T> get(const json& obj, const std::string& key, const std::string& prefix) {
        if (!obj.contains(key)) return std::nullopt;
        try {
            return obj.at(key).get<T>();
        } catch (const std::exception&) {
            error("field " + prefix + key + " has the wrong type");
            return std::nullopt;
        }
    }

    template <typename T>
    void read(const json& obj, const std::string& key, T& into, const std::string& prefix = "") {
        if (auto v = get<T>(obj, key, prefix)) into = *v;
    }

    // Runs a constructor that may throw, recording its message.
    template <typename F>
    void attempt(const std::string& what, F&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            error(what + ": " + e.what());
        }
    }

private:
    std::vector<std::string>& errors_;
};

const std::set<std::string> kTopLevel = {
    "scenario", "alpha", "rho", "f", "nu0", "grid", "driver", "N", "M", "seed", "tol", "max_iter", "initial_guess",
    "initial_point", "brownian_bridge", "density_estimation", "pde", "blowup", "loss_bound", "l_minus", "pairs",
    "outputs"};

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::simulate: return "simulate";
        case Scenario::solve_mv: return "solve-mv";
        case Scenario::solve_pde: return "solve-pde";
        case Scenario::jump_size: return "jump-size";
        case Scenario::check_regime: return "check-regime";
        case Scenario::verify_comparison: return "verify-comparison";
        case Scenario::nonphysical: return "nonphysical";
        case Scenario::blowup_restart: return "blowup-restart";
    }
    return "unknown";
}

std::optional<Scenario> scenario_from_string(const std::string& s) {
    for (Scenario k : {Scenario::simulate, Scenario::solve_mv, Scenario::solve_pde, Scenario::jump_size,
                       Scenario::check_regime, Scenario::verify_comparison, Scenario::nonphysical,
                       Scenario::blowup_restart})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> errors) : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

RunConfig parse_config(const json& doc, std::optional<Scenario> scenario) {
    std::vector<std::string> errors;
    Reader r(errors);
    RunConfig cfg;
    cfg.source = doc;
    if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});
    r.reject_unknown(doc, kTopLevel, "");

    if (auto s = r.get<std::string>(doc, "scenario", "")) {
        if (auto k = scenario_from_string(*s))
            cfg.scenario = *k;
        else
            r.error("unknown scenario: " + *s);
        if (scenario && scenario_from_string(*s) && *scenario_from_string(*s) != *scenario)
            r.error("scenario " + *s + " does not match subcommand " + to_string(*scenario));
    } else if (scenario) {
        cfg.scenario = *scenario;
    } else {
        r.error("missing field: scenario");
    }

    if (!doc.contains("alpha")) r.error("missing field: alpha");
    r.read(doc, "alpha", cfg.alpha);
    if (!std::isfinite(cfg.alpha)) r.error("alpha must be finite");
    r.read(doc, "rho", cfg.rho);
    if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) r.error("rho must be in [0,1)");

    if (doc.contains("f")) r.attempt("f", [&] { cfg.f = feedback_from_json(doc.at("f")); });
    if (doc.contains("nu0")) r.attempt("nu0", [&] { cfg.nu0 = measure_from_json(doc.at("nu0")); });

    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (!g.is_object()) {
            r.error("grid must be an object");
        } else {
            r.reject_unknown(g, {"T", "dt"}, "grid.");
            double T = 1.0, dt = 1e-3;
            r.read(g, "T", T, "grid.");
            r.read(g, "dt", dt, "grid.");
            r.attempt("grid", [&] { cfg.grid = TimeGrid(T, dt); });
        }
    }

    auto read_count = [&](const char* key, std::size_t& into) {
        if (auto v = r.get<double>(doc, key, "")) {
            if (!(*v >= 1.0) || std::floor(*v) != *v)
                r.error(std::string(key) + " must be a positive integer");
            else
                into = static_cast<std::size_t>(*v);
        }
    };
    read_count("N", cfg.n_particles);
    read_count("M", cfg.m_paths);
    read_count("max_iter", cfg.max_iter);
    read_count("pairs", cfg.pairs);
    r.read(doc, "seed", cfg.seed);
    r.read(doc, "tol", cfg.tol);
    if (!(cfg.tol > 0.0)) r.error("tol must be > 0");
    r.read(doc, "brownian_bridge", cfg.brownian_bridge);
    if (auto p = r.get<double>(doc, "initial_point", "")) cfg.initial_point = *p;
    r.read(doc, "loss_bound", cfg.loss_bound);
    if (!(cfg.loss_bound >= 0.0 && cfg.loss_bound <= 1.0)) r.error("loss_bound must be in [0,1]");
    r.read(doc, "l_minus", cfg.l_minus);
    if (!(cfg.l_minus >= 0.0 && cfg.l_minus < 1.0)) r.error("l_minus must be in [0,1)");

    // Driver: kind defaults to brownian, or brownian_plus_path when rho > 0.
    cfg.driver.rho = cfg.rho;
    cfg.driver.kind = cfg.rho > 0.0 ? DriverSpec::Kind::brownian_plus_path : DriverSpec::Kind::brownian;
    if (doc.contains("driver")) {
        const json& d = doc.at("driver");
        if (!d.is_object()) {
            r.error("driver must be an object");
        } else {
            r.reject_unknown(d, {"kind", "common_path", "drift"}, "driver.");
            if (auto k = r.get<std::string>(d, "kind", "driver."))
                r.attempt("driver.kind", [&] { cfg.driver.kind = driver_kind_from_string(*k); });
            if (auto p = r.get<std::vector<double>>(d, "common_path", "driver.")) cfg.driver.common_path = *p;
            if (auto p = r.get<std::vector<double>>(d, "drift", "driver.")) cfg.driver.drift = *p;
        }
    }
    if (cfg.rho >= 0.0 && cfg.rho < 1.0) r.attempt("driver", [&] { cfg.driver.validate(cfg.grid); });

    if (doc.contains("initial_guess")) {
        const json& g = doc.at("initial_guess");
        if (g.is_string() && (g == "zero" || g == "one")) {
            cfg.initial_guess = std::vector<double>(cfg.grid.n_points(), g == "one" ? 1.0 : 0.0);
        } else if (g.is_number()) {
            const double c = g.get<double>();
            if (!(c >= 0.0 && c <= 1.0)) r.error("initial_guess constant must be in [0,1]");
            cfg.initial_guess = std::vector<double>(cfg.grid.n_points(), c);
        } else if (g.is_array()) {
            r.attempt("initial_guess", [&] {
                auto v = g.get<std::vector<double>>();
                LossPath check(cfg.grid, v);
                cfg.initial_guess = std::move(v);
            });
        } else {
            r.error("initial_guess must be \"zero\", \"one\", a number or an array");
        }
    }

    if (doc.contains("density_estimation")) {
        const json& d = doc.at("density_estimation");
        DensityOutput out;
        if (!d.is_object()) {
            r.error("density_estimation must be an object");
        } else {
            r.reject_unknown(d, {"delta", "times", "xs"}, "density_estimation.");
            r.read(d, "delta", out.delta, "density_estimation.");
            r.read(d, "times", out.times, "density_estimation.");
            r.read(d, "xs", out.xs, "density_estimation.");
            if (out.xs.empty()) r.error("density_estimation.xs must not be empty");
        }
        cfg.density = out;
    }

    if (doc.contains("pde")) {
        const json& p = doc.at("pde");
        if (!p.is_object()) {
            r.error("pde must be an object");
        } else {
            r.reject_unknown(p, {"dx", "x_max", "inner_corrections", "snapshot_times", "explosion_window", "explosion_cap"},
                             "pde.");
            r.read(p, "dx", cfg.pde.dx, "pde.");
            r.read(p, "x_max", cfg.pde.x_max, "pde.");
            r.read(p, "inner_corrections", cfg.pde.inner_corrections, "pde.");
            r.read(p, "snapshot_times", cfg.pde.snapshot_times, "pde.");
            r.read(p, "explosion_window", cfg.pde.explosion_window, "pde.");
            r.read(p, "explosion_cap", cfg.pde.explosion_cap, "pde.");
            if (!(cfg.pde.dx > 0.0)) r.error("pde.dx must be > 0");
            if (cfg.pde.inner_corrections < 0) r.error("pde.inner_corrections must be >= 0");
            if (!(cfg.pde.explosion_cap > 0.0)) r.error("pde.explosion_cap must be > 0");
        }
    }

    if (doc.contains("blowup")) {
        const json& b = doc.at("blowup");
        if (!b.is_object()) {
            r.error("blowup must be an object");
        } else {
            r.reject_unknown(b, {"threshold", "delta", "restart_seed"}, "blowup.");
            r.read(b, "threshold", cfg.blowup.threshold, "blowup.");
            r.read(b, "delta", cfg.blowup.delta, "blowup.");
            r.read(b, "restart_seed", cfg.blowup.restart_seed, "blowup.");
        }
    }

    if (doc.contains("outputs")) {
        const json& o = doc.at("outputs");
        if (!o.is_object()) {
            r.error("outputs must be an object");
        } else {
            r.reject_unknown(o, {"out", "diag", "density_out", "snapshots"}, "outputs.");
            r.read(o, "out", cfg.outputs.out, "outputs.");
            r.read(o, "diag", cfg.outputs.diag, "outputs.");
            r.read(o, "density_out", cfg.outputs.density_out, "outputs.");
            r.read(o, "snapshots", cfg.outputs.snapshots, "outputs.");
        }
    }

    // Scenario-specific requirements.
    const bool needs_monotone = cfg.scenario == Scenario::simulate || cfg.scenario == Scenario::blowup_restart ||
                                cfg.scenario == Scenario::jump_size;
    if (needs_monotone && !(cfg.alpha >= 0.0)) r.error("alpha must be >= 0 for " + to_string(cfg.scenario));
    if (cfg.scenario == Scenario::jump_size && !(cfg.alpha > 0.0)) r.error("alpha must be > 0 for jump-size");
    if (cfg.scenario == Scenario::solve_pde) {
        if (!(cfg.alpha >= 0.0)) r.error("alpha must be >= 0 for solve-pde");
        if (cfg.f.kind() != FeedbackFn::Kind::linear) r.error("solve-pde supports only f = linear");
        if (cfg.rho != 0.0) r.error("solve-pde supports only rho = 0");
    }
    if ((cfg.scenario == Scenario::simulate || cfg.scenario == Scenario::blowup_restart) &&
        std::abs(cfg.nu0.total_mass() - 1.0) > 1e-9)
        r.error("nu0 must be a probability measure");
    if (cfg.scenario == Scenario::nonphysical && cfg.alpha == 0.0) r.error("alpha must be nonzero for nonphysical");

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

RunConfig parse_config_text(const std::string& text, std::optional<Scenario> scenario) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    return parse_config(doc, scenario);
}

}  // namespace cmv
