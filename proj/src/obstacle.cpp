#include "rsmb/obstacle.hpp"

#include "rsmb/errors.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace rsmb::obstacle {

namespace {

void check_obstacle(const Field& v) {
    for (int j = 1; j < v.grid.nx(); ++j) {
        if (v.values(0, j) > 0.0) {
            throw Error(ErrorKind::ObstacleInitialPositive,
                        "obstacle v(0, x) must be <= 0; v(0, " + std::to_string(v.grid.x(j)) +
                            ") = " + std::to_string(v.values(0, j)));
        }
    }
}

/// z_star = z + dt * lap(z) at interior nodes; Dirichlet nodes stay zero.
void heat_step(const Eigen::Ref<const Eigen::RowVectorXd>& z, double mu,
               Eigen::Ref<Eigen::RowVectorXd> out) {
    const auto n = z.size();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    out.segment(1, n - 2) = z.segment(1, n - 2) +
                            mu * (z.segment(2, n - 2) - 2.0 * z.segment(1, n - 2) + z.segment(0, n - 2));
}

/// Root d in [a, 0] of d - kappa * arctan(d^2) = a (a < 0). The left side is
/// strictly increasing in d for d <= 0, so the bracket always holds.
double implicit_gap(double a, double kappa) {
    if (a >= 0.0) {
        return a;
    }
    double lo = a;
    double hi = 0.0;
    double d = a;
    for (int iter = 0; iter < 100; ++iter) {
        const double d2 = d * d;
        const double phi = d - kappa * std::atan(d2) - a;
        if (phi > 0.0) {
            hi = d;
        } else {
            lo = d;
        }
        const double dphi = 1.0 - 2.0 * kappa * d / (1.0 + d2 * d2);
        double next = d - phi / dphi;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - d) <= 1e-16 * (1.0 + std::abs(a))) {
            return next;
        }
        d = next;
    }
    return d;
}

}  // namespace

double penalty(double gap, double epsilon) noexcept {
    const double neg = std::min(gap, 0.0);
    return std::atan(neg * neg) / epsilon;
}

Solution solve_penalized(const Field& v, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw Error(ErrorKind::ConfigError, "penalization epsilon must be > 0");
    }
    check_obstacle(v);
    const GridSpec& grid = v.grid;
    const double mu = grid.dt() / (grid.dx() * grid.dx());
    const double kappa = grid.dt() / epsilon;
    Solution sol{Field(grid), Eigen::MatrixXd::Zero(grid.n_times(), grid.n_nodes()),
                 Penalized{epsilon}};
    Eigen::RowVectorXd star(grid.n_nodes());
    for (int i = 0; i < grid.nt(); ++i) {
        heat_step(sol.z.values.row(i), mu, star);
        for (int j = 1; j < grid.nx(); ++j) {
            const double obstacle = v.values(i + 1, j);
            const double gap = implicit_gap(star[j] - obstacle, kappa);
            sol.z.values(i + 1, j) = obstacle + gap;
            sol.eta(i + 1, j) = grid.dx() * (sol.z.values(i + 1, j) - star[j]);
        }
    }
    return sol;
}

Solution solve_projected(const Field& v, const Field* forcing) {
    check_obstacle(v);
    const GridSpec& grid = v.grid;
    if (forcing != nullptr && !(forcing->grid == grid)) {
        throw Error(ErrorKind::GridMismatch, "forcing and obstacle live on different grids");
    }
    const double mu = grid.dt() / (grid.dx() * grid.dx());
    Solution sol{Field(grid), Eigen::MatrixXd::Zero(grid.n_times(), grid.n_nodes()), Projected{}};
    Eigen::RowVectorXd star(grid.n_nodes());
    for (int i = 0; i < grid.nt(); ++i) {
        heat_step(sol.z.values.row(i), mu, star);
        if (forcing != nullptr) {
            star.segment(1, grid.nx() - 1) +=
                grid.dt() * forcing->values.row(i).segment(1, grid.nx() - 1);
        }
        for (int j = 1; j < grid.nx(); ++j) {
            const double obstacle = v.values(i + 1, j);
            if (star[j] < obstacle) {
                sol.z.values(i + 1, j) = obstacle;
                sol.eta(i + 1, j) = grid.dx() * (obstacle - star[j]);
            } else {
                sol.z.values(i + 1, j) = star[j];
            }
        }
    }
    return sol;
}

double field_norm(const Eigen::MatrixXd& values, const GridSpec& grid, const Norm& norm) {
    if (const auto* weighted = std::get_if<Weighted>(&norm)) {
        const Eigen::RowVectorXd w = (-weighted->r * grid.nodes().array()).exp().transpose();
        return (values.array().abs().rowwise() * w.array()).maxCoeff();
    }
    return values.cwiseAbs().maxCoeff();
}

std::pair<double, double> stability_gap(const Field& v1, const Field& v2, const Norm& norm) {
    if (!(v1.grid == v2.grid)) {
        throw Error(ErrorKind::GridMismatch, "obstacles live on different grids");
    }
    const Solution z1 = solve_projected(v1);
    const Solution z2 = solve_projected(v2);
    return {field_norm(z1.z.values - z2.z.values, v1.grid, norm),
            field_norm(v1.values - v2.values, v1.grid, norm)};
}

double complementarity(const Solution& solution, const Field& v) {
    return ((solution.z.values - v.values).array() * solution.eta.array()).sum();
}

void write_csv(std::ostream& out, const Solution& solution, const Field& v) {
    const GridSpec& grid = v.grid;
    out << "t,x,z,v,eta_cell\n";
    out.precision(17);
    for (int i = 0; i < grid.n_times(); ++i) {
        for (int j = 0; j < grid.n_nodes(); ++j) {
            out << grid.t(i) << ',' << grid.x(j) << ',' << solution.z.values(i, j) << ','
                << v.values(i, j) << ',' << solution.eta(i, j) << '\n';
        }
    }
}

}  // namespace rsmb::obstacle
