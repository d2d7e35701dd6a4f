// Command-line front end: one subcommand per scenario, JSON configs, CSV out.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmv/config.hpp"
#include "cmv/io.hpp"
#include "cmv/run.hpp"

namespace {

struct ConfigArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string diag;
    std::string density_out;
    std::string snapshots;
};

void add_config_options(CLI::App* sub, ConfigArgs& a, bool diag, bool density, bool snapshots,
                        bool config_required = true) {
    auto* opt = sub->add_option("--config", a.config, "JSON config or manifest");
    if (config_required) opt->required();
    sub->add_option("--seed", a.seed, "override the master seed");
    sub->add_option("--out", a.out, "primary output file");
    if (diag) sub->add_option("--diag", a.diag, "diagnostics JSON");
    if (density) sub->add_option("--density-out", a.density_out, "density snapshots CSV (t,x,V)");
    if (snapshots) sub->add_option("--snapshots", a.snapshots, "V snapshots CSV (t,x,V)");
}

int run_config(const ConfigArgs& a, cmv::Scenario scenario, cmv::json doc = nullptr) {
    if (doc.is_null()) {
        try {
            doc = cmv::unwrap_manifest(cmv::json::parse(cmv::read_text(a.config)));
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cmv::kExitConfig;
        }
    }
    if (doc.is_object()) {
        if (a.seed) doc["seed"] = *a.seed;
        auto set_output = [&](const char* key, const std::string& v) {
            if (!v.empty()) doc["outputs"][key] = v;
        };
        set_output("out", a.out);
        set_output("diag", a.diag);
        set_output("density_out", a.density_out);
        set_output("snapshots", a.snapshots);
    }
    cmv::RunConfig cfg;
    try {
        cfg = cmv::parse_config(doc, scenario);
    } catch (const cmv::ConfigError& e) {
        for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << '\n';
        return cmv::kExitConfig;
    }
    return cmv::run(cfg, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification tools for McKean-Vlasov loss processes with positive feedback"};
    app.set_version_flag("--version", std::string(cmv::kVersion));
    app.require_subcommand(1);
    std::optional<int> threads;
    app.add_option("--threads", threads, "worker threads (also CMV_THREADS)")->check(CLI::PositiveNumber);

    ConfigArgs simulate, solve_mv, solve_pde, jump, regime, comparison, nonphysical, restart_run;

    auto* s_sim = app.add_subcommand("simulate", "finite particle system");
    add_config_options(s_sim, simulate, false, true, false);
    auto* s_mv = app.add_subcommand("solve-mv", "Picard iteration for the mean-field loss");
    add_config_options(s_mv, solve_mv, true, false, false);
    auto* s_pde = app.add_subcommand("solve-pde", "finite-difference solve of the density equation");
    add_config_options(s_pde, solve_pde, false, false, true);
    auto* s_jump = app.add_subcommand("jump-size", "physical jump size of a measure");
    add_config_options(s_jump, jump, false, false, false, false);
    std::string jump_measure, jump_f = "linear";
    std::optional<double> jump_alpha;
    double jump_l_minus = 0.0;
    s_jump->add_option("--measure", jump_measure, "measure JSON (instead of --config)");
    s_jump->add_option("--alpha", jump_alpha, "feedback strength");
    s_jump->add_option("--f", jump_f, "feedback: linear or neglog");
    s_jump->add_option("--l-minus", jump_l_minus, "loss before the jump");
    auto* s_regime = app.add_subcommand("check-regime", "weak-feedback certificate");
    add_config_options(s_regime, regime, false, false, false);

    auto* s_verify = app.add_subcommand("verify", "exact inequality checks");
    s_verify->require_subcommand(1);
    auto* s_cmp = s_verify->add_subcommand("comparison", "comparison inequality on random loss pairs");
    add_config_options(s_cmp, comparison, false, false, false);

    auto* s_scenario = app.add_subcommand("scenario", "named constructions");
    s_scenario->require_subcommand(1);
    auto* s_np = s_scenario->add_subcommand("nonphysical", "continuous solution violating the jump condition");
    add_config_options(s_np, nonphysical, false, false, false);

    std::string loss_csv, density_csv, blowup_out;
    double blowup_alpha = 0.0, threshold = 0.0;
    auto* s_blowup = app.add_subcommand("blowup", "blow-up events of a loss path");
    s_blowup->add_option("--loss", loss_csv, "loss CSV (t,L)")->required();
    s_blowup->add_option("--density", density_csv, "density CSV (t,x,V)");
    s_blowup->add_option("--alpha", blowup_alpha, "feedback strength")->required();
    s_blowup->add_option("--threshold", threshold, "jump threshold (default 0.02)");
    s_blowup->add_option("--out", blowup_out, "events JSON (default stdout)");

    std::string measure_json, restart_out;
    double restart_alpha = 0.0;
    std::optional<double> restart_jump;
    auto* s_restart = app.add_subcommand("restart", "shifted post-jump measure");
    s_restart->add_option("--measure", measure_json, "measure JSON")->required();
    s_restart->add_option("--alpha", restart_alpha, "feedback strength")->required();
    s_restart->add_option("--jump", restart_jump, "jump size (default: physical jump)");
    s_restart->add_option("--out", restart_out, "output JSON (default stdout)");

    auto* s_br = app.add_subcommand("blowup-restart", "particle blow-up followed by a restart");
    add_config_options(s_br, restart_run, true, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cmv::kExitConfig;
    }
    cmv::configure_threads(threads);

    using cmv::Scenario;
    if (*s_sim) return run_config(simulate, Scenario::simulate);
    if (*s_mv) return run_config(solve_mv, Scenario::solve_mv);
    if (*s_pde) return run_config(solve_pde, Scenario::solve_pde);
    if (*s_jump) {
        if (!jump.config.empty()) return run_config(jump, Scenario::jump_size);
        if (jump_measure.empty() || !jump_alpha) {
            std::cerr << "jump-size needs --config, or --measure and --alpha\n";
            return cmv::kExitConfig;
        }
        cmv::json doc;
        try {
            doc = cmv::json{{"alpha", *jump_alpha},
                            {"nu0", cmv::json::parse(cmv::read_text(jump_measure))},
                            {"f", jump_f},
                            {"l_minus", jump_l_minus}};
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cmv::kExitConfig;
        }
        return run_config(jump, Scenario::jump_size, doc);
    }
    if (*s_regime) return run_config(regime, Scenario::check_regime);
    if (*s_cmp) return run_config(comparison, Scenario::verify_comparison);
    if (*s_np) return run_config(nonphysical, Scenario::nonphysical);
    if (*s_br) return run_config(restart_run, Scenario::blowup_restart);
    if (*s_blowup)
        return cmv::run_blowup_events(loss_csv, density_csv, blowup_alpha, threshold, blowup_out, std::cout, std::cerr);
    if (*s_restart)
        return cmv::run_restart(measure_json, restart_alpha, restart_jump, restart_out, std::cout, std::cerr);
    return cmv::kExitConfig;
}
