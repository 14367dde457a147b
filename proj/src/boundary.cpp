#include "rsmb/boundary.hpp"

#include "rsmb/coefficients.hpp"
#include "rsmb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rsmb::boundary {

namespace {

/// 1 - e^{-q}(1 + q), accurate for small q.
double first_moment_factor(double q) {
    if (q < 1e-3) {
        return q * q * (0.5 - q * (1.0 / 3.0 - q * (0.125 - q / 30.0)));
    }
    return -std::expm1(-q) - q * std::exp(-q);
}

void check_size(const Eigen::Ref<const Eigen::VectorXd>& u, const GridSpec& grid) {
    if (u.size() != grid.n_nodes()) {
        throw Error(ErrorKind::GridMismatch, "profile length " + std::to_string(u.size()) +
                                                 " does not match grid nodes " +
                                                 std::to_string(grid.n_nodes()));
    }
}

double imbalance_speed(const Kind& kind, const Eigen::VectorXd& d, const Eigen::VectorXd& weights,
                       const GridSpec& grid) {
    if (const auto* exp_imb = std::get_if<ExpImbalance>(&kind)) {
        return exp_imb->alpha * weights.dot(d);
    }
    if (const auto* stefan = std::get_if<StefanFd>(&kind)) {
        // d(0) = 0 at the shared Dirichlet node
        if (stefan->second_order) {
            return (4.0 * d[1] - d[2]) / (2.0 * grid.dx());
        }
        return d[1] / grid.dx();
    }
    if (const auto* table = std::get_if<Table>(&kind)) {
        return interpolate(TableCoef{table->imbalance, table->speed}, weights.dot(d));
    }
    return 0.0;
}

double kind_lambda(const Kind& kind) {
    if (const auto* e = std::get_if<ExpImbalance>(&kind)) {
        return e->lambda;
    }
    if (const auto* t = std::get_if<Table>(&kind)) {
        return t->lambda;
    }
    return 0.0;
}

}  // namespace

Eigen::VectorXd g_lambda_weights(const GridSpec& grid, double lambda) {
    if (!(lambda > 0.0)) {
        throw Error(ErrorKind::ConfigError, "g_lambda needs lambda > 0");
    }
    const int n = grid.n_nodes();
    const double h = grid.dx();
    const double q = lambda * h;
    const double zeroth = -std::expm1(-q);
    const double first = first_moment_factor(q) / q;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int j = 0; j + 1 < n; ++j) {
        // lambda^2 int_cell e^{-lambda x} * hat functions, exactly
        const double e = lambda * std::exp(-lambda * grid.x(j));
        w[j] += e * (zeroth - first);
        w[j + 1] += e * first;
    }
    return w;
}

double g_lambda(const Eigen::Ref<const Eigen::VectorXd>& k, const GridSpec& grid, double lambda) {
    check_size(k, grid);
    return g_lambda_weights(grid, lambda).dot(k);
}

Eigen::VectorXd F_Mr(const Eigen::Ref<const Eigen::VectorXd>& u, const GridSpec& grid, double M,
                     double r) {
    check_size(u, grid);
    Eigen::VectorXd out(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double x = grid.x(static_cast<int>(j));
        out[j] = (std::exp(-r * x) * u[j] <= M) ? u[j] : std::exp(r * x) * M;
    }
    return out;
}

Eigen::VectorXd truncate(const Eigen::Ref<const Eigen::VectorXd>& u, const GridSpec& grid, double M,
                         double r) {
    if (grid.is_half_line()) {
        return F_Mr(u, grid, M, r);
    }
    return u.cwiseMin(M);
}

Evaluator::Evaluator(BoundaryFunctional fn, const GridSpec& grid)
    : fn_(std::move(fn)), grid_(grid) {
    const double lambda = kind_lambda(fn_.kind);
    if (lambda > 0.0) {
        weights_ = g_lambda_weights(grid_, lambda);
    }
    if (fn_.clamp && !(*fn_.clamp >= 0.0)) {
        throw Error(ErrorKind::ConfigError, "boundary clamp must be >= 0");
    }
}

double Evaluator::operator()(const Eigen::Ref<const Eigen::VectorXd>& v1,
                             const Eigen::Ref<const Eigen::VectorXd>& v2) const {
    return with_truncation(v1, v2, fn_.truncation_M);
}

double Evaluator::with_truncation(const Eigen::Ref<const Eigen::VectorXd>& v1,
                                  const Eigen::Ref<const Eigen::VectorXd>& v2,
                                  std::optional<double> M) const {
    check_size(v1, grid_);
    check_size(v2, grid_);
    if (std::holds_alternative<Zero>(fn_.kind)) {
        return 0.0;
    }
    Eigen::VectorXd d;
    if (M) {
        d = truncate(v1, grid_, *M, fn_.weight_r) - truncate(v2, grid_, *M, fn_.weight_r);
    } else {
        d = v1 - v2;
    }
    double h = imbalance_speed(fn_.kind, d, weights_, grid_);
    if (fn_.clamp) {
        h = std::clamp(h, -*fn_.clamp, *fn_.clamp);
    }
    return h;
}

double eval_h(const BoundaryFunctional& fn, const Eigen::Ref<const Eigen::VectorXd>& v1,
              const Eigen::Ref<const Eigen::VectorXd>& v2, const GridSpec& grid) {
    return Evaluator(fn, grid)(v1, v2);
}

}  // namespace rsmb::boundary
