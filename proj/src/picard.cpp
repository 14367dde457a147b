#include "rsmb/picard.hpp"

#include "rsmb/errors.hpp"
#include "rsmb/heat_kernel.hpp"
#include "rsmb/obstacle.hpp"

#include <algorithm>
#include <cmath>

namespace rsmb::picard {

namespace {

double cell_lo(const GridSpec& grid, int l) { return std::max(0.0, grid.x(l) - 0.5 * grid.dx()); }
double cell_hi(const GridSpec& grid, int l) {
    return std::min(grid.length(), grid.x(l) + 0.5 * grid.dx());
}

/// Time-by-(2 n) source [f dt + sigma xi dt | sign * h_M (v ^ M) dt] of one profile.
Eigen::MatrixXd build_source(const Field& v, const std::vector<double>& speed,
                             const Coefficient& f, const Coefficient& sigma, const NoiseField& xi,
                             const spde::Model& model, double sign) {
    const GridSpec& grid = v.grid;
    const int n = grid.n_nodes();
    const double dt = grid.dt();
    Eigen::MatrixXd src(grid.nt(), 2 * n);
    for (int m = 0; m < grid.nt(); ++m) {
        const Eigen::VectorXd u = v.values.row(m).transpose();
        Eigen::VectorXd q = u;
        if (std::isfinite(model.M)) {
            q = boundary::truncate(u, grid, model.M, grid.weight_r());
        }
        for (int l = 0; l < n; ++l) {
            const double x = grid.x(l);
            src(m, l) = dt * (evaluate(f, x, u[l]) + evaluate(sigma, x, u[l]) * xi.xi(m, l));
            src(m, n + l) = sign * dt * speed[static_cast<std::size_t>(m)] * q[l];
        }
    }
    return src;
}

void convolve(Eigen::MatrixXd& w, const Eigen::MatrixXd& src, const KernelCache& cache) {
    const int nt = cache.grid().nt();
    for (int k = 1; k <= nt; ++k) {
        const int count = nt - k + 1;
        w.middleRows(k, count).noalias() += src.topRows(count) * cache.stacked(k);
    }
}

Pair mild_solve(const Pair& prev, const Eigen::MatrixXd& init1, const Eigen::MatrixXd& init2,
                const spde::Model& model, const NoiseField& xi1, const NoiseField& xi2,
                const KernelCache& cache) {
    const GridSpec& grid = cache.grid();
    if (!(prev.v1.grid == grid) || !(prev.v2.grid == grid) || !(xi1.grid == grid) ||
        !(xi2.grid == grid)) {
        throw Error(ErrorKind::GridMismatch, "iterate, noise and kernel tables must share one grid");
    }
    const spde::Stepper stepper(model, grid);
    std::vector<double> speed(static_cast<std::size_t>(grid.nt()));
    for (int m = 0; m < grid.nt(); ++m) {
        speed[static_cast<std::size_t>(m)] =
            stepper.h(prev.v1.values.row(m).transpose(), prev.v2.values.row(m).transpose());
    }
    const Eigen::MatrixXd src1 =
        build_source(prev.v1, speed, model.coeffs.f1, model.coeffs.sigma1, xi1, model, 1.0);
    const Eigen::MatrixXd src2 =
        build_source(prev.v2, speed, model.coeffs.f2, model.coeffs.sigma2, xi2, model, -1.0);

    Pair w{Field(grid, init1), Field(grid, init2)};
    convolve(w.v1.values, src1, cache);
    convolve(w.v2.values, src2, cache);
    for (Field* f : {&w.v1, &w.v2}) {
        f->values.col(0).setZero();
        f->values.col(grid.nx()).setZero();
    }
    return w;
}

Field constant_in_time(const GridSpec& grid, const Eigen::VectorXd& v0) {
    return Field(grid, v0.transpose().replicate(grid.n_times(), 1));
}

obstacle::Norm norm_for(const GridSpec& grid) {
    if (grid.is_half_line()) {
        return obstacle::Weighted{grid.weight_r()};
    }
    return obstacle::SupNorm{};
}

}  // namespace

KernelCache::KernelCache(const GridSpec& grid, double lap_scale)
    : grid_(grid), lap_scale_(lap_scale) {
    if (!(lap_scale > 0.0)) {
        throw Error(ErrorKind::ConfigError, "lap_scale must be > 0");
    }
    const double L = grid.length();
    images_ = kernel::default_images(lap_scale * grid.horizon() / (L * L));
    const int n = grid.n_nodes();
    std::vector<double> lo(static_cast<std::size_t>(n));
    std::vector<double> hi(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        lo[static_cast<std::size_t>(l)] = cell_lo(grid, l);
        hi[static_cast<std::size_t>(l)] = cell_hi(grid, l);
    }
    tables_.reserve(static_cast<std::size_t>(grid.nt()));
    for (int k = 1; k <= grid.nt(); ++k) {
        const double tau = (k - 0.5) * grid.dt();
        if (!(tau > 0.0)) {
            throw Error(ErrorKind::KernelSingularity, "kernel lag must be positive");
        }
        Eigen::MatrixXd table(2 * n, n);
        for (int j = 0; j < n; ++j) {
            const double x = grid.x(j);
            for (int l = 0; l < n; ++l) {
                const auto ul = static_cast<std::size_t>(l);
                table(l, j) = cell_integral(tau, x, lo[ul], hi[ul]);
                table(n + l, j) = kernel(tau, x, hi[ul]) - kernel(tau, x, lo[ul]);
            }
        }
        tables_.push_back(std::move(table));
    }
}

double KernelCache::cell_integral(double tau, double x, double a, double b) const {
    const double L = grid_.length();
    return kernel::integral_H(lap_scale_ * tau / (L * L), x / L, a / L, b / L, images_);
}

double KernelCache::kernel(double tau, double x, double y) const {
    const double L = grid_.length();
    return kernel::eval_H(lap_scale_ * tau / (L * L), x / L, y / L, images_) / L;
}

Eigen::MatrixXd KernelCache::initial_term(const Eigen::VectorXd& v0) const {
    const int n = grid_.n_nodes();
    if (v0.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "initial profile does not match the grid");
    }
    Eigen::MatrixXd out(grid_.n_times(), n);
    out.row(0) = v0.transpose();
    Eigen::MatrixXd weights(n, n);
    for (int i = 1; i < grid_.n_times(); ++i) {
        const double t = grid_.t(i);
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) {
                weights(j, l) = cell_integral(t, grid_.x(j), cell_lo(grid_, l), cell_hi(grid_, l));
            }
        }
        out.row(i) = (weights * v0).transpose();
    }
    return out;
}

Pair mild_solve_w(const Pair& prev, const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0,
                  const spde::Model& model, const NoiseField& xi1, const NoiseField& xi2,
                  const KernelCache& cache) {
    return mild_solve(prev, cache.initial_term(v1_0), cache.initial_term(v2_0), model, xi1, xi2,
                      cache);
}

IterationReport picard_iterate(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0,
                               const spde::Model& model, const NoiseField& xi1,
                               const NoiseField& xi2, int n_iters, double tolerance) {
    if (n_iters < 2) {
        throw Error(ErrorKind::ConfigError, "picard needs at least 2 iterations");
    }
    if (model.lap_scale != 1.0) {
        throw Error(ErrorKind::ConfigError, "picard iteration supports lap_scale = 1 only");
    }
    spde::validate(model);
    const GridSpec& grid = xi1.grid;
    // validates the initial data the same way the direct solver does
    spde::initial_state(v1_0, v2_0, 0.0, model, grid);

    const KernelCache cache(grid, model.lap_scale);
    const Eigen::MatrixXd init1 = cache.initial_term(v1_0);
    const Eigen::MatrixXd init2 = cache.initial_term(v2_0);
    const obstacle::Norm norm = norm_for(grid);

    IterationReport report;
    report.tolerance = tolerance;
    Pair v{constant_in_time(grid, v1_0), constant_in_time(grid, v2_0)};
    for (int n = 1; n <= n_iters; ++n) {
        Pair w = mild_solve(v, init1, init2, model, xi1, xi2, cache);
        Field minus1(grid, -w.v1.values);
        Field minus2(grid, -w.v2.values);
        const obstacle::Solution z1 = obstacle::solve_projected(minus1);
        const obstacle::Solution z2 = obstacle::solve_projected(minus2);
        w.v1.values += z1.z.values;
        w.v2.values += z2.z.values;

        const double d = obstacle::field_norm(w.v1.values - v.v1.values, grid, norm) +
                         obstacle::field_norm(w.v2.values - v.v2.values, grid, norm);
        if (!std::isfinite(d)) {
            throw Error(ErrorKind::NumericalInstability,
                        "picard iterate " + std::to_string(n) + " is not finite");
        }
        report.d.push_back(d);
        report.iters = n;
        v = std::move(w);
        if (d == 0.0) {
            break;
        }
    }
    report.converged = report.d.back() <= tolerance;
    report.final_pair = std::move(v);
    return report;
}

double gap_vs_direct(IterationReport& report, const Eigen::VectorXd& v1_0,
                     const Eigen::VectorXd& v2_0, const spde::Model& model, const NoiseField& xi1,
                     const NoiseField& xi2) {
    if (!report.final_pair) {
        throw Error(ErrorKind::ConfigError, "report carries no final Picard pair");
    }
    const spde::Trajectory direct =
        spde::run_relative_frame(v1_0, v2_0, 0.0, model, xi1, xi2, spde::RunOptions{1});
    const auto rows = static_cast<Eigen::Index>(direct.profile_t.size());
    const Pair& pair = *report.final_pair;
    const double gap =
        std::max((pair.v1.values.topRows(rows) - direct.v1).cwiseAbs().maxCoeff(),
                 (pair.v2.values.topRows(rows) - direct.v2).cwiseAbs().maxCoeff());
    report.final_gap_vs_direct = gap;
    return gap;
}

void to_json(nlohmann::json& j, const IterationReport& report) {
    j = nlohmann::json{{"schema", 1},
                       {"d", report.d},
                       {"iters", report.iters},
                       {"converged", report.converged},
                       {"tolerance", report.tolerance}};
    if (report.final_gap_vs_direct) {
        j["final_gap_vs_direct"] = *report.final_gap_vs_direct;
    } else {
        j["final_gap_vs_direct"] = nullptr;
    }
}

}  // namespace rsmb::picard
