#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmv/grid.hpp"
#include "cmv/rng.hpp"

namespace cmv {

/// Driver Z on the time grid.
///
///   brownian            Z = B (+ A)
///   brownian_plus_path  Z = sqrt(1 - rho^2) B + rho beta (+ A)
///   fixed_path          Z = beta (+ A), no idiosyncratic noise
///
/// beta is the common path; when it is not supplied it is drawn from the
/// common-noise stream of the run seed. A is an optional deterministic drift.
struct DriverSpec {
    enum class Kind { brownian, brownian_plus_path, fixed_path };

    Kind kind = Kind::brownian;
    double rho = 0.0;
    std::optional<std::vector<double>> common_path;
    std::optional<std::vector<double>> drift;

    /// Throws std::invalid_argument when paths have the wrong length, do not
    /// start at 0, or rho is out of range for the kind.
    void validate(const TimeGrid& grid) const;

    /// Weight of the idiosyncratic Brownian part.
    double idiosyncratic_scale() const;

    /// rho * beta + A on the grid (zeros when neither applies).
    std::vector<double> common_offset(const TimeGrid& grid, std::uint64_t seed) const;
};

std::string to_string(DriverSpec::Kind k);
DriverSpec::Kind driver_kind_from_string(const std::string& s);

/// Standard Brownian path on the grid from the given stream and lane.
std::vector<double> brownian_path(const TimeGrid& grid, const RandomStream& stream, std::uint32_t lane = kGaussianLane);

}  // namespace cmv
