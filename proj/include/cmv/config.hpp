#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmv/driver.hpp"
#include "cmv/feedback.hpp"
#include "cmv/grid.hpp"
#include "cmv/io.hpp"
#include "cmv/measure.hpp"

namespace cmv {

enum class Scenario { simulate, solve_mv, solve_pde, jump_size, check_regime, verify_comparison, nonphysical, blowup_restart };

std::string to_string(Scenario s);
/// Accepts the CLI spellings ("solve-mv", "verify-comparison", ...).
std::optional<Scenario> scenario_from_string(const std::string& s);

struct DensityOutput {
    double delta = 0.0;
    std::vector<double> times;
    std::vector<double> xs;
};

struct PdeOptions {
    double dx = 2e-3;
    double x_max = 0.0;
    int inner_corrections = 2;
    std::vector<double> snapshot_times;
    double explosion_window = 0.05;
    double explosion_cap = 50.0;
};

struct BlowupOptions {
    double threshold = 0.0;
    double delta = 0.0;
    std::uint64_t restart_seed = 1;
};

struct OutputPaths {
    std::string out;
    std::string diag;
    std::string density_out;
    std::string snapshots;
};

struct RunConfig {
    Scenario scenario = Scenario::simulate;
    double alpha = 0.0;
    double rho = 0.0;
    FeedbackFn f = FeedbackFn::linear();
    Measure1D nu0 = Measure1D::uniform(0.0, 1.0);
    TimeGrid grid{1.0, 1e-3};
    DriverSpec driver;
    std::size_t n_particles = 1000;
    std::size_t m_paths = 20000;
    std::uint64_t seed = 0;
    double tol = 1e-4;
    std::size_t max_iter = 100;
    std::optional<std::vector<double>> initial_guess;
    std::optional<double> initial_point;
    bool brownian_bridge = false;
    std::optional<DensityOutput> density;
    PdeOptions pde;
    BlowupOptions blowup;
    double loss_bound = 0.0;
    double l_minus = 0.0;
    std::size_t pairs = 20;
    OutputPaths outputs;

    /// The JSON the config was parsed from, after command-line overrides.
    json source;
};

/// Every problem found while parsing, one message each.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Parses and validates a config document. Unknown fields are errors. The
/// scenario comes from the document or, when absent there, from the
/// argument. Throws ConfigError listing all problems.
RunConfig parse_config(const json& doc, std::optional<Scenario> scenario = std::nullopt);
RunConfig parse_config_text(const std::string& text, std::optional<Scenario> scenario = std::nullopt);

}  // namespace cmv
