#pragma once

#include "rsmb/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <variant>
#include <vector>

namespace rsmb::boundary {

/// h = alpha * g_lambda(v1 - v2): weighted imbalance near the boundary.
struct ExpImbalance {
    double alpha = 5.0;
    double lambda = 100.0;
};
/// Relative-frame Stefan approximation (v1 - v2)'(0) by a one-sided difference.
struct StefanFd {
    bool second_order = false;
};
struct Zero {};
/// User curve imbalance -> speed, imbalance = g_lambda(v1 - v2); linear
/// interpolation, clamped to the end points.
struct Table {
    double lambda = 100.0;
    std::vector<double> imbalance;
    std::vector<double> speed;
};

using Kind = std::variant<ExpImbalance, StefanFd, Zero, Table>;

struct BoundaryFunctional {
    Kind kind = Zero{};
    /// |h| <= clamp (bounded boundary speed: global existence)
    std::optional<double> clamp;
    /// inputs capped at M (v ^ M on [0,1], F_{M,r} on the half-line)
    std::optional<double> truncation_M;
    double weight_r = 0.0;
};

/// Quadrature weights w with g_lambda(k) = w . k for the piecewise-linear
/// interpolant of k; lambda^2 e^{-lambda x} is integrated exactly on each cell.
Eigen::VectorXd g_lambda_weights(const GridSpec& grid, double lambda);

/// g_lambda(k) = int_0^L lambda^2 e^{-lambda x} k(x) dx over the grid domain.
double g_lambda(const Eigen::Ref<const Eigen::VectorXd>& k, const GridSpec& grid, double lambda);

/// Weighted cap F_{M,r}(u)(x) = e^{rx} min(e^{-rx} u(x), M); entries below the
/// cap are returned unchanged (bit-exact).
Eigen::VectorXd F_Mr(const Eigen::Ref<const Eigen::VectorXd>& u, const GridSpec& grid, double M,
                     double r);

/// Input truncation used by h_M / h_{M,r} and by the capped advection flux.
Eigen::VectorXd truncate(const Eigen::Ref<const Eigen::VectorXd>& u, const GridSpec& grid, double M,
                         double r);

/// Boundary speed h(v1, v2); truncation is applied to the inputs first and the
/// clamp last.
double eval_h(const BoundaryFunctional& fn, const Eigen::Ref<const Eigen::VectorXd>& v1,
              const Eigen::Ref<const Eigen::VectorXd>& v2, const GridSpec& grid);

/// Explicit Euler step of p' = h.
constexpr double advance_p(double p, double p_prime, double dt) noexcept { return p + dt * p_prime; }

/// eval_h with the g_lambda weights computed once for a fixed grid.
class Evaluator {
public:
    Evaluator(BoundaryFunctional fn, const GridSpec& grid);

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& v1,
                      const Eigen::Ref<const Eigen::VectorXd>& v2) const;
    /// Same, with the truncation level replaced by `M` (h_M).
    double with_truncation(const Eigen::Ref<const Eigen::VectorXd>& v1,
                           const Eigen::Ref<const Eigen::VectorXd>& v2,
                           std::optional<double> M) const;

    const BoundaryFunctional& functional() const noexcept { return fn_; }
    /// Upper bound on |h| when clamped, otherwise none.
    std::optional<double> bound() const noexcept { return fn_.clamp; }

private:
    BoundaryFunctional fn_;
    GridSpec grid_;
    Eigen::VectorXd weights_;
};

}  // namespace rsmb::boundary
