#pragma once

#include "rsmb/boundary.hpp"
#include "rsmb/coefficients.hpp"
#include "rsmb/grid.hpp"
#include "rsmb/noise.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace rsmb::spde {

/// Relative-frame state: v1 is the bid profile at distance x below p, v2 the
/// ask profile at distance x above p.
struct CoupledState {
    Eigen::VectorXd v1;
    Eigen::VectorXd v2;
    double p = 0.0;
    double p_prime = 0.0;
    double time = 0.0;
    long step = 0;
    bool blown_up = false;
    std::optional<double> tau_estimate;
};

/// Everything a step needs besides the state and the noise.
struct Model {
    ModelCoefficients coeffs;
    boundary::BoundaryFunctional boundary;
    /// Truncation level of the advected profile and of h (h_M).
    double M = std::numeric_limits<double>::infinity();
    /// Blow-up threshold on ||v1|| + ||v2||.
    double M_max = std::numeric_limits<double>::infinity();
    double lap_scale = 1.0;
};

/// Throws ConfigError when M > M_max or the functional carries a different
/// truncation level.
void validate(const Model& model);

/// sup_j e^{-r x_j} |u_j|; r = 0 gives the sup norm.
template <typename Derived>
double weighted_norm(const Eigen::MatrixBase<Derived>& profile, const GridSpec& grid, double r) {
    if (r == 0.0) {
        return profile.cwiseAbs().maxCoeff();
    }
    return (profile.cwiseAbs().array() * (-r * grid.nodes().array()).exp()).maxCoeff();
}

/// Norm used for blow-up bookkeeping: sup on [0,1], C_r on the half-line.
double state_norm(const Eigen::VectorXd& v, const GridSpec& grid);

/// Initial state with both profiles given; p_prime is set to h_M(v1, v2).
CoupledState initial_state(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, double p0,
                           const Model& model, const GridSpec& grid);

/// Reusable stepper: caches the boundary weights for a fixed grid.
class Stepper {
public:
    Stepper(Model model, const GridSpec& grid);

    /// One forward Euler step driven by the noise rows xi1, xi2 (variance
    /// 1/(dx dt)), followed by reflection at 0 and the boundary update.
    void step(CoupledState& state, const Eigen::Ref<const Eigen::VectorXd>& xi1,
              const Eigen::Ref<const Eigen::VectorXd>& xi2) const;

    double h(const Eigen::Ref<const Eigen::VectorXd>& v1,
             const Eigen::Ref<const Eigen::VectorXd>& v2) const;

    const Model& model() const noexcept { return model_; }
    const GridSpec& grid() const noexcept { return grid_; }

private:
    void advance_profile(Eigen::VectorXd& v, const Coefficient& f, const Coefficient& sigma,
                         const Eigen::Ref<const Eigen::VectorXd>& xi, double velocity) const;

    Model model_;
    GridSpec grid_;
    boundary::Evaluator h_;
    Eigen::VectorXd x_;
};

CoupledState step_reflected(const CoupledState& state, const Model& model,
                            const Eigen::Ref<const Eigen::VectorXd>& xi1,
                            const Eigen::Ref<const Eigen::VectorXd>& xi2, const GridSpec& grid);

struct RunOptions {
    /// Profiles are stored every `stride` steps; 0 stores none.
    int stride = 0;
};

struct Trajectory {
    explicit Trajectory(const GridSpec& g) : grid(g) {}

    GridSpec grid;
    std::uint64_t seed = 0;
    // per step, index 0 is the initial state
    std::vector<double> t;
    std::vector<double> p;
    std::vector<double> p_prime;
    std::vector<double> norm1;
    std::vector<double> norm2;
    // stored profiles, one row per stored time
    std::vector<double> profile_t;
    Eigen::MatrixXd v1;
    Eigen::MatrixXd v2;
    CoupledState final_state;

    bool blown_up() const noexcept { return final_state.blown_up; }
    std::size_t steps() const noexcept { return t.empty() ? 0 : t.size() - 1; }
};

/// Runs to the grid horizon or the blow-up time, noise drawn from (seed, stream 0/1).
Trajectory run_relative_frame(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0, double p0,
                              const Model& model, const GridSpec& grid, std::uint64_t seed,
                              const RunOptions& options = {});

/// Same, driven by explicit noise fields.
Trajectory run_relative_frame(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0, double p0,
                              const Model& model, const NoiseField& xi1, const NoiseField& xi2,
                              const RunOptions& options = {});

/// step,t,p,p_prime,norm1,norm2
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// t,x,v1,v2 for every stored profile
void write_profiles_csv(std::ostream& out, const Trajectory& traj);

enum class Side { Bid, Ask };

/// Absolute price level of relative coordinate x: p - x on the bid side, p + x on the ask side.
constexpr double to_absolute(double p, double x, Side side) noexcept {
    return side == Side::Bid ? p - x : p + x;
}
constexpr double to_relative(double p, double y, Side side) noexcept {
    return side == Side::Bid ? p - y : y - p;
}

}  // namespace rsmb::spde
