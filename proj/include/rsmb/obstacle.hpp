#pragma once

#include "rsmb/grid.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <utility>
#include <variant>

namespace rsmb {

/// Parabolic obstacle problem on the grid: find z >= v with z(0,.) = 0, z = 0 at
/// the Dirichlet nodes, dz/dt = z'' + eta, eta >= 0 supported on {z = v}.
namespace obstacle {

struct Penalized {
    double epsilon = 1e-4;
};
struct Projected {};
using Method = std::variant<Penalized, Projected>;

struct Solution {
    Field z;
    /// Reflection mass per cell (value * space * time); row i is the mass
    /// added during the step ending at t_i, row 0 is zero.
    Eigen::MatrixXd eta;
    Method method;
};

/// Penalty g_eps(d) = arctan((d ^ 0)^2) / eps acting on the gap d = z - v.
double penalty(double gap, double epsilon) noexcept;

/// Explicit heat step, penalty solved implicitly node by node:
///   z_{i+1} - (dt/eps) arctan(((z_{i+1} - v_{i+1}) ^ 0)^2) = z_i + dt * lap(z_i).
/// The implicit penalty keeps the scheme stable and monotone in eps for any eps > 0.
Solution solve_penalized(const Field& v, double epsilon);

/// Explicit heat step followed by the projection z <- max(z, v); the clipped
/// deficit is the reflection mass. `forcing`, when given, is added to the heat step.
Solution solve_projected(const Field& v, const Field* forcing = nullptr);

struct SupNorm {};
struct Weighted {
    double r = 0.0;
};
using Norm = std::variant<SupNorm, Weighted>;

/// sup over space-time of |u| (optionally e^{-rx}|u|).
double field_norm(const Eigen::MatrixXd& values, const GridSpec& grid, const Norm& norm);

/// (||z1 - z2||, ||v1 - v2||) for the projected solutions of two obstacles.
std::pair<double, double> stability_gap(const Field& v1, const Field& v2, const Norm& norm);

/// sum over cells of (z - v) * eta.
double complementarity(const Solution& solution, const Field& v);

/// Long-format CSV: t,x,z,v,eta_cell (one row per node and time level).
void write_csv(std::ostream& out, const Solution& solution, const Field& v);

}  // namespace obstacle
}  // namespace rsmb
