#include "cmv/driver.hpp"

#include <cmath>
#include <stdexcept>

namespace cmv {

namespace {

void check_path(const std::vector<double>& p, const TimeGrid& grid, const char* what) {
    if (p.size() != grid.n_points())
        throw std::invalid_argument(std::string("driver: ") + what + " must have n_steps+1 values");
    if (p.front() != 0.0) throw std::invalid_argument(std::string("driver: ") + what + " must start at 0");
    for (double v : p)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string("driver: ") + what + " has non-finite values");
}

}  // namespace

void DriverSpec::validate(const TimeGrid& grid) const {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must be in [0,1)");
    if (kind == Kind::brownian && rho != 0.0) throw std::invalid_argument("driver: rho must be 0 for kind brownian");
    if (kind == Kind::fixed_path && !common_path)
        throw std::invalid_argument("driver: fixed_path requires common_path");
    if (common_path) check_path(*common_path, grid, "common_path");
    if (drift) check_path(*drift, grid, "drift");
}

double DriverSpec::idiosyncratic_scale() const {
    switch (kind) {
        case Kind::brownian: return 1.0;
        case Kind::brownian_plus_path: return std::sqrt(1.0 - rho * rho);
        case Kind::fixed_path: return 0.0;
    }
    return 1.0;
}

std::vector<double> DriverSpec::common_offset(const TimeGrid& grid, std::uint64_t seed) const {
    std::vector<double> out(grid.n_points(), 0.0);
    if (kind == Kind::fixed_path) {
        out = *common_path;
    } else if (kind == Kind::brownian_plus_path && rho != 0.0) {
        const std::vector<double> beta =
            common_path ? *common_path : brownian_path(grid, RandomStream(seed, kCommonNoiseStream));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho * beta[i];
    }
    if (drift)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*drift)[i];
    return out;
}

std::string to_string(DriverSpec::Kind k) {
    switch (k) {
        case DriverSpec::Kind::brownian: return "brownian";
        case DriverSpec::Kind::brownian_plus_path: return "brownian_plus_path";
        case DriverSpec::Kind::fixed_path: return "fixed_path";
    }
    return "unknown";
}

DriverSpec::Kind driver_kind_from_string(const std::string& s) {
    if (s == "brownian") return DriverSpec::Kind::brownian;
    if (s == "brownian_plus_path") return DriverSpec::Kind::brownian_plus_path;
    if (s == "fixed_path") return DriverSpec::Kind::fixed_path;
    throw std::invalid_argument("unknown driver kind: " + s);
}

std::vector<double> brownian_path(const TimeGrid& grid, const RandomStream& stream, std::uint32_t lane) {
    std::vector<double> w(grid.n_points(), 0.0);
    const double sdt = std::sqrt(grid.dt());
    for (std::size_t n = 0; n < grid.n_steps(); n += 2) {
        const auto [a, b] = stream.normal_pair(n / 2, lane);
        w[n + 1] = w[n] + sdt * a;
        if (n + 2 < w.size()) w[n + 2] = w[n + 1] + sdt * b;
    }
    return w;
}

}  // namespace cmv
