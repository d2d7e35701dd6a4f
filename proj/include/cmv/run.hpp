#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "cmv/config.hpp"

namespace cmv {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// Hash of the canonical (key-sorted, compact) dump of a config document.
std::string config_hash(const json& doc);

/// Thread count from the argument, else CMV_THREADS, else the runtime
/// default. Returns the count in effect (1 without OpenMP). Results do not
/// depend on it.
int configure_threads(std::optional<int> requested);

/// Unwraps a manifest ({"config": ..., "config_hash": ...}) to its config;
/// any other document is returned unchanged.
json unwrap_manifest(const json& doc);

/// Runs a parsed config, writing declared outputs and `<out>.manifest.json`.
/// Returns 0 on success, 2 on a numerical abort (explosion, overflow or a
/// violated exact inequality), 1 on configuration problems found late.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Blow-up events of a loss CSV (columns t, L). With a density CSV
/// (columns t, x, V) the physical jump of the latest snapshot before each
/// event is added. Writes JSON to `out_path` when given, else to `out`.
int run_blowup_events(const std::string& loss_csv, const std::string& density_csv, double alpha, double threshold,
                      const std::string& out_path, std::ostream& out, std::ostream& err);

/// Shifted post-jump measure of a measure JSON; the jump defaults to the
/// physical jump size.
int run_restart(const std::string& measure_json, double alpha, std::optional<double> jump, const std::string& out_path,
                std::ostream& out, std::ostream& err);

}  // namespace cmv
