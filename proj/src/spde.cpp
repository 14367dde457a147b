#include "rsmb/spde.hpp"

#include "rsmb/errors.hpp"

#include <ostream>
#include <string>

namespace rsmb::spde {

namespace {

std::optional<double> truncation_level(const Model& model) {
    if (std::isfinite(model.M)) {
        return model.M;
    }
    return std::nullopt;
}

void check_profile(const Eigen::VectorXd& v, const GridSpec& grid, const char* name) {
    if (v.size() != grid.n_nodes()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(name) + " has " +
                                                      std::to_string(v.size()) + " nodes, grid has " +
                                                      std::to_string(grid.n_nodes()));
    }
    if ((v.array() < 0.0).any() || !v.allFinite()) {
        throw Error(ErrorKind::ConfigError, std::string(name) + " must be finite and >= 0");
    }
    if (v[0] != 0.0 || v[v.size() - 1] != 0.0) {
        throw Error(ErrorKind::ConfigError, std::string(name) + " must vanish at the Dirichlet nodes");
    }
}

template <typename RowFn>
Trajectory run(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0, double p0,
               const Model& model, const GridSpec& grid, const RunOptions& options, RowFn&& rows) {
    const Stepper stepper(model, grid);
    Trajectory traj(grid);
    traj.final_state = initial_state(v1_0, v2_0, p0, model, grid);
    CoupledState& state = traj.final_state;

    const auto n_steps = static_cast<std::size_t>(grid.nt());
    for (auto* series : {&traj.t, &traj.p, &traj.p_prime, &traj.norm1, &traj.norm2}) {
        series->reserve(n_steps + 1);
    }
    const int stride = options.stride;
    if (stride > 0) {
        const int stored = grid.nt() / stride + 1;
        traj.v1.resize(stored, grid.n_nodes());
        traj.v2.resize(stored, grid.n_nodes());
        traj.profile_t.reserve(static_cast<std::size_t>(stored));
    }
    auto record = [&](int i) {
        traj.t.push_back(state.time);
        traj.p.push_back(state.p);
        traj.p_prime.push_back(state.p_prime);
        traj.norm1.push_back(state_norm(state.v1, grid));
        traj.norm2.push_back(state_norm(state.v2, grid));
        if (stride > 0 && i % stride == 0) {
            const auto row = static_cast<Eigen::Index>(traj.profile_t.size());
            traj.v1.row(row) = state.v1.transpose();
            traj.v2.row(row) = state.v2.transpose();
            traj.profile_t.push_back(state.time);
        }
    };

    record(0);
    Eigen::VectorXd xi1(grid.n_nodes());
    Eigen::VectorXd xi2(grid.n_nodes());
    for (int i = 0; i < grid.nt() && !state.blown_up; ++i) {
        rows(i, xi1, xi2);
        stepper.step(state, xi1, xi2);
        record(i + 1);
    }
    if (stride > 0) {
        const auto stored = static_cast<Eigen::Index>(traj.profile_t.size());
        traj.v1.conservativeResize(stored, Eigen::NoChange);
        traj.v2.conservativeResize(stored, Eigen::NoChange);
    }
    return traj;
}

}  // namespace

void validate(const Model& model) {
    if (!(model.M > 0.0) || !(model.M_max > 0.0)) {
        throw Error(ErrorKind::ConfigError, "truncation levels M and M_max must be > 0");
    }
    if (std::isfinite(model.M) && model.M > model.M_max) {
        throw Error(ErrorKind::ConfigError, "truncation level M exceeds the blow-up level M_max");
    }
    if (model.boundary.truncation_M && *model.boundary.truncation_M != model.M) {
        throw Error(ErrorKind::ConfigError,
                    "boundary.truncation_M disagrees with the model truncation level M");
    }
    if (!(model.lap_scale > 0.0)) {
        throw Error(ErrorKind::ConfigError, "lap_scale must be > 0");
    }
}

double state_norm(const Eigen::VectorXd& v, const GridSpec& grid) {
    return weighted_norm(v, grid, grid.weight_r());
}

CoupledState initial_state(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, double p0,
                           const Model& model, const GridSpec& grid) {
    check_profile(v1, grid, "v1_0");
    check_profile(v2, grid, "v2_0");
    CoupledState state;
    state.v1 = v1;
    state.v2 = v2;
    state.p = p0;
    state.p_prime = Stepper(model, grid).h(v1, v2);
    return state;
}

Stepper::Stepper(Model model, const GridSpec& grid)
    : model_(std::move(model)), grid_(grid), h_(model_.boundary, grid), x_(grid.nodes()) {
    validate(model_);
    if (model_.lap_scale * grid_.dt() > kMaxStabilityFactor * grid_.dx() * grid_.dx()) {
        throw Error(ErrorKind::CflViolation, "lap_scale * dt exceeds 0.5 dx^2");
    }
}

double Stepper::h(const Eigen::Ref<const Eigen::VectorXd>& v1,
                  const Eigen::Ref<const Eigen::VectorXd>& v2) const {
    return h_.with_truncation(v1, v2, truncation_level(model_));
}

void Stepper::advance_profile(Eigen::VectorXd& v, const Coefficient& f, const Coefficient& sigma,
                              const Eigen::Ref<const Eigen::VectorXd>& xi, double velocity) const {
    const double dt = grid_.dt();
    const double dx = grid_.dx();
    const double mu = model_.lap_scale * dt / (dx * dx);
    const double courant = velocity * dt / dx;
    const Eigen::Index n = v.size();

    Eigen::VectorXd q;
    if (std::isfinite(model_.M)) {
        q = boundary::truncate(v, grid_, model_.M, grid_.weight_r());
    } else {
        q = v;
    }
    Eigen::VectorXd next(n);
    next[0] = 0.0;
    next[n - 1] = 0.0;
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        const double u = v[j];
        const double upwind = courant >= 0.0 ? q[j] - q[j - 1] : q[j + 1] - q[j];
        const double x = x_[j];
        next[j] = u + mu * (v[j + 1] - 2.0 * u + v[j - 1]) - courant * upwind +
                  dt * (evaluate(f, x, u) + evaluate(sigma, x, u) * xi[j]);
    }
    v = next.cwiseMax(0.0);
}

void Stepper::step(CoupledState& state, const Eigen::Ref<const Eigen::VectorXd>& xi1,
                   const Eigen::Ref<const Eigen::VectorXd>& xi2) const {
    if (state.blown_up) {
        throw Error(ErrorKind::AlreadyBlownUp, "state blew up at t = " +
                                                   std::to_string(state.tau_estimate.value_or(state.time)));
    }
    const int n = grid_.n_nodes();
    if (state.v1.size() != n || state.v2.size() != n || xi1.size() != n || xi2.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "profile or noise slice does not match the grid");
    }
    const double c = h(state.v1, state.v2);
    if (!std::isfinite(c) || grid_.dt() * std::abs(c) > grid_.dx()) {
        throw Error(ErrorKind::NumericalInstability,
                    "advection CFL violated: dt * |h| = " + std::to_string(grid_.dt() * std::abs(c)) +
                        " > dx at t = " + std::to_string(state.time));
    }

    const Eigen::VectorXd prev1 = state.v1;
    const Eigen::VectorXd prev2 = state.v2;
    // v1: -c d/dx (v1 ^ M); v2: +c d/dx (v2 ^ M)
    advance_profile(state.v1, model_.coeffs.f1, model_.coeffs.sigma1, xi1, c);
    advance_profile(state.v2, model_.coeffs.f2, model_.coeffs.sigma2, xi2, -c);
    state.p = boundary::advance_p(state.p, c, grid_.dt());
    state.time = grid_.t(static_cast<int>(++state.step));

    const bool finite = state.v1.allFinite() && state.v2.allFinite();
    if (!finite || state_norm(state.v1, grid_) + state_norm(state.v2, grid_) >= model_.M_max) {
        state.blown_up = true;
        state.tau_estimate = state.time;
        if (!finite) {
            state.v1 = prev1;
            state.v2 = prev2;
            return;
        }
    }
    state.p_prime = h(state.v1, state.v2);
}

CoupledState step_reflected(const CoupledState& state, const Model& model,
                            const Eigen::Ref<const Eigen::VectorXd>& xi1,
                            const Eigen::Ref<const Eigen::VectorXd>& xi2, const GridSpec& grid) {
    CoupledState next = state;
    Stepper(model, grid).step(next, xi1, xi2);
    return next;
}

Trajectory run_relative_frame(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0, double p0,
                              const Model& model, const GridSpec& grid, std::uint64_t seed,
                              const RunOptions& options) {
    Trajectory traj = run(v1_0, v2_0, p0, model, grid, options,
                          [&](int i, Eigen::VectorXd& xi1, Eigen::VectorXd& xi2) {
                              noise_row(grid, seed, kStreamBid, i, xi1);
                              noise_row(grid, seed, kStreamAsk, i, xi2);
                          });
    traj.seed = seed;
    return traj;
}

Trajectory run_relative_frame(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0, double p0,
                              const Model& model, const NoiseField& xi1, const NoiseField& xi2,
                              const RunOptions& options) {
    if (!(xi1.grid == xi2.grid)) {
        throw Error(ErrorKind::GridMismatch, "the two noise fields live on different grids");
    }
    Trajectory traj = run(v1_0, v2_0, p0, model, xi1.grid, options,
                          [&](int i, Eigen::VectorXd& a, Eigen::VectorXd& b) {
                              a = xi1.xi.row(i).transpose();
                              b = xi2.xi.row(i).transpose();
                          });
    traj.seed = xi1.seed;
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "step,t,p,p_prime,norm1,norm2\n";
    out.precision(17);
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        out << k << ',' << traj.t[k] << ',' << traj.p[k] << ',' << traj.p_prime[k] << ','
            << traj.norm1[k] << ',' << traj.norm2[k] << '\n';
    }
}

void write_profiles_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,v1,v2\n";
    out.precision(17);
    for (std::size_t k = 0; k < traj.profile_t.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        for (int j = 0; j < traj.grid.n_nodes(); ++j) {
            out << traj.profile_t[k] << ',' << traj.grid.x(j) << ',' << traj.v1(row, j) << ','
                << traj.v2(row, j) << '\n';
        }
    }
}

}  // namespace rsmb::spde
