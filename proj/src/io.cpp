#include "cmv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmv {

std::string format_shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::string format_17(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, r.ptr};
}

json to_json(const Measure1D& mu) {
    const auto bp = mu.breakpoints();
    const auto cdf = mu.cdf_values();
    return json{{"breakpoints", std::vector<double>(bp.begin(), bp.end())},
                {"cdf", std::vector<double>(cdf.begin(), cdf.end())}};
}

json to_json(const FeedbackFn& f) {
    json j{{"kind", f.name()}};
    if (f.kind() == FeedbackFn::Kind::table) j["table"] = json{{"x", f.table_x()}, {"f", f.table_f()}};
    return j;
}

Measure1D measure_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("nu0 must be an object");
    if (j.contains("uniform")) {
        const auto& u = j.at("uniform");
        if (!u.is_array() || u.size() != 2) throw std::invalid_argument("nu0.uniform must be [a, b]");
        return Measure1D::uniform(u[0].get<double>(), u[1].get<double>());
    }
    if (j.contains("density")) {
        const auto& d = j.at("density");
        const auto values = d.at("values").get<std::vector<double>>();
        return Measure1D::from_density(d.at("breakpoints").get<std::vector<double>>(), values);
    }
    if (j.contains("breakpoints") && j.contains("cdf"))
        return Measure1D(j.at("breakpoints").get<std::vector<double>>(), j.at("cdf").get<std::vector<double>>());
    throw std::invalid_argument("nu0 needs one of: uniform, density, breakpoints+cdf");
}

FeedbackFn feedback_from_json(const json& j) {
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else if (j.is_object() && j.contains("kind")) {
        kind = j.at("kind").get<std::string>();
    } else {
        throw std::invalid_argument("f must be a string or an object with a kind");
    }
    if (kind == "linear") return FeedbackFn::linear();
    if (kind == "neglog") return FeedbackFn::neglog();
    if (kind == "table") {
        if (!j.is_object() || !j.contains("table")) throw std::invalid_argument("f of kind table needs a table");
        const auto& t = j.at("table");
        return FeedbackFn::table(t.at("x").get<std::vector<double>>(), t.at("f").get<std::vector<double>>());
    }
    throw std::invalid_argument("unknown feedback kind: " + kind);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw std::invalid_argument("csv: header and columns differ in count");
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows) throw std::invalid_argument("csv: columns differ in length");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += format_17(columns[c][r]);
        }
        out += '\n';
    }
    write_text(path, out);
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return columns[c];
    throw std::invalid_argument("csv: no column named " + name);
}

CsvTable read_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    }
    t.columns.resize(t.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= t.columns.size()) throw std::runtime_error("csv: too many fields on line " + std::to_string(lineno));
            double v = 0.0;
            const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (r.ec != std::errc()) throw std::runtime_error("csv: bad number on line " + std::to_string(lineno));
            t.columns[c++].push_back(v);
        }
        if (c != t.columns.size()) throw std::runtime_error("csv: too few fields on line " + std::to_string(lineno));
    }
    return t;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cmv
