#pragma once

#include "rsmb/grid.hpp"
#include "rsmb/noise.hpp"
#include "rsmb/spde.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace rsmb::picard {

/// Heat-kernel quadrature tables for the mild form on a fixed grid. The kernel
/// is the Dirichlet kernel of lap_scale * d^2/dx^2 on [0, L]; on the half-line
/// grid this stands in for G with the artificial condition at L.
///
/// For lag k >= 1 (source cell [t_{i-k}, t_{i-k+1}] seen from t_i) the kernel is
/// evaluated at the cell midpoint tau_k = (k - 1/2) dt:
///   smooth(k)(l, j)    = int_{cell l} H(tau_k, x_j, y) dy
///   transport(k)(l, j) = int_{cell l} dH/dy(tau_k, x_j, y) dy
/// (stored transposed, so that rows of a time-by-space source multiply directly).
class KernelCache {
public:
    explicit KernelCache(const GridSpec& grid, double lap_scale = 1.0);

    const GridSpec& grid() const noexcept { return grid_; }
    double lap_scale() const noexcept { return lap_scale_; }
    int images() const noexcept { return images_; }

    /// [smooth(k); transport(k)] stacked: 2 n_nodes x n_nodes.
    const Eigen::MatrixXd& stacked(int k) const { return tables_[static_cast<std::size_t>(k - 1)]; }

    /// int H(t_i, x_j, y) v0(y) dy for every time level (row 0 is v0 itself).
    Eigen::MatrixXd initial_term(const Eigen::VectorXd& v0) const;

    /// Cell integral of the scaled kernel over [a, b].
    double cell_integral(double tau, double x, double a, double b) const;
    double kernel(double tau, double x, double y) const;

private:
    GridSpec grid_;
    double lap_scale_;
    int images_;
    std::vector<Eigen::MatrixXd> tables_;
};

struct Pair {
    Field v1;
    Field v2;
};

/// Mild-form solve for both profiles given the previous iterate:
///   w = int H v0 + (+/-) int int dH/dy h_M (v ^ M) + int int H f(v) + int int H sigma(v) dW,
/// the transport term entering with + for v1 and - for v2.
Pair mild_solve_w(const Pair& prev, const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0,
                  const spde::Model& model, const NoiseField& xi1, const NoiseField& xi2,
                  const KernelCache& cache);

struct IterationReport {
    /// d[n-1] = ||v1_n - v1_{n-1}|| + ||v2_n - v2_{n-1}||, v_0 the constant initial data
    std::vector<double> d;
    int iters = 0;
    bool converged = false;
    double tolerance = 1e-4;
    std::optional<double> final_gap_vs_direct;
    std::optional<Pair> final_pair;
};

void to_json(nlohmann::json& j, const IterationReport& report);

/// Picard iteration: w_{n+1} = mild_solve_w(v_n), z_{n+1} the projected obstacle
/// solution with obstacle -w_{n+1}, v_{n+1} = w_{n+1} + z_{n+1}. The same noise
/// drives every iterate. Stops early only at an exact fixed point.
IterationReport picard_iterate(const Eigen::VectorXd& v1_0, const Eigen::VectorXd& v2_0,
                               const spde::Model& model, const NoiseField& xi1,
                               const NoiseField& xi2, int n_iters, double tolerance = 1e-4);

/// Max over both profiles of the space-time sup distance between the final Picard
/// pair and the forward Euler run driven by the same noise. Also stored in the report.
double gap_vs_direct(IterationReport& report, const Eigen::VectorXd& v1_0,
                     const Eigen::VectorXd& v2_0, const spde::Model& model, const NoiseField& xi1,
                     const NoiseField& xi2);

}  // namespace rsmb::picard
