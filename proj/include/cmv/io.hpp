#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cmv/feedback.hpp"
#include "cmv/measure.hpp"

namespace cmv {

using json = nlohmann::json;

/// Shortest decimal form that round-trips (e.g. 0.5, 1e-05).
std::string format_shortest(double v);

/// %.17g without locale dependence.
std::string format_17(double v);

json to_json(const Measure1D& mu);
json to_json(const FeedbackFn& f);

/// Accepts {"breakpoints", "cdf"}, {"uniform": [a, b]} and
/// {"density": {"breakpoints", "values"}} (one value per segment).
Measure1D measure_from_json(const json& j);
/// Accepts "linear", "neglog" or {"kind": ..., "table": {"x": [...], "f": [...]}}.
FeedbackFn feedback_from_json(const json& j);

/// Column-major table with a header row, comma separated, LF line endings
/// and 17 significant digits. Throws std::runtime_error when the file
/// cannot be written.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace cmv
