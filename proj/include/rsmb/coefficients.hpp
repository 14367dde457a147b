#pragma once

#include "rsmb/grid.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace rsmb {

// Closed-form coefficient families in (relative x, value u).
struct ConstantCoef {
    double c = 0.0;
};
struct AffineCoef {  // a + b u
    double a = 0.0;
    double b = 0.0;
};
struct ExpDecayCoef {  // e^{-delta x} (a + b u)
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
};
struct SineCoef {  // a + b sin(u)
    double a = 0.0;
    double b = 0.0;
};
/// Per-bin table in x, linear interpolation between centers, clamped outside.
struct TableCoef {
    std::vector<double> centers;
    std::vector<double> values;
};

using Coefficient = std::variant<ConstantCoef, AffineCoef, ExpDecayCoef, SineCoef, TableCoef>;

double evaluate(const Coefficient& coef, double x, double u);

template <typename DerivedX, typename DerivedU>
Eigen::VectorXd evaluate(const Coefficient& coef, const Eigen::MatrixBase<DerivedX>& x,
                         const Eigen::MatrixBase<DerivedU>& u) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        out[j] = evaluate(coef, x[j], u[j]);
    }
    return out;
}

/// Lipschitz constant in u (sup over x).
double lipschitz_in_u(const Coefficient& coef);

/// Linear interpolation of a table at x, clamped to the end values.
double interpolate(const TableCoef& table, double x);

std::string describe(const Coefficient& coef);

/// Drift and volatility of both profiles plus the half-line growth/decay metadata.
struct ModelCoefficients {
    Coefficient f1 = ConstantCoef{};
    Coefficient f2 = ConstantCoef{};
    Coefficient sigma1 = ConstantCoef{};
    Coefficient sigma2 = ConstantCoef{};
    double r = 0.0;
    double delta = 0.0;

    /// max of the four Lipschitz constants
    double lipschitz_C() const;
};

/// Sampled check of |sigma_i(x,u)| <= R e^{-delta x} (e^{rx} + |u|) on the grid
/// nodes and the u values in `u_samples`.
bool satisfies_volatility_growth(const ModelCoefficients& coeffs, const GridSpec& grid, double R,
                                 const std::vector<double>& u_samples);

/// Coefficients with f = sigma = 0.
ModelCoefficients zero_coefficients();

}  // namespace rsmb
