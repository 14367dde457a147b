#include "rsmb/coefficients.hpp"

#include "rsmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsmb {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
}  // namespace

double interpolate(const TableCoef& table, double x) {
    const auto& c = table.centers;
    const auto& v = table.values;
    if (c.empty() || c.size() != v.size()) {
        throw Error(ErrorKind::ConfigError, "coefficient table needs matching, non-empty columns");
    }
    if (x <= c.front()) {
        return v.front();
    }
    if (x >= c.back()) {
        return v.back();
    }
    const auto it = std::upper_bound(c.begin(), c.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(c.begin(), it));
    const double w = (x - c[k - 1]) / (c[k] - c[k - 1]);
    return (1.0 - w) * v[k - 1] + w * v[k];
}

double evaluate(const Coefficient& coef, double x, double u) {
    return std::visit(
        overloaded{
            [](const ConstantCoef& k) { return k.c; },
            [&](const AffineCoef& k) { return k.a + k.b * u; },
            [&](const ExpDecayCoef& k) { return std::exp(-k.delta * x) * (k.a + k.b * u); },
            [&](const SineCoef& k) { return k.a + k.b * std::sin(u); },
            [&](const TableCoef& k) { return interpolate(k, x); },
        },
        coef);
}

double lipschitz_in_u(const Coefficient& coef) {
    return std::visit(overloaded{
                          [](const ConstantCoef&) { return 0.0; },
                          [](const AffineCoef& k) { return std::abs(k.b); },
                          [](const ExpDecayCoef& k) {
                              // sup over x >= 0 of e^{-delta x}
                              return k.delta >= 0.0 ? std::abs(k.b) : HUGE_VAL;
                          },
                          [](const SineCoef& k) { return std::abs(k.b); },
                          [](const TableCoef&) { return 0.0; },
                      },
                      coef);
}

std::string describe(const Coefficient& coef) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const ConstantCoef& k) { os << "constant(" << k.c << ")"; },
                   [&](const AffineCoef& k) { os << "affine(" << k.a << "," << k.b << ")"; },
                   [&](const ExpDecayCoef& k) {
                       os << "exp_decay(" << k.a << "," << k.b << "," << k.delta << ")";
                   },
                   [&](const SineCoef& k) { os << "sine(" << k.a << "," << k.b << ")"; },
                   [&](const TableCoef& k) { os << "table[" << k.centers.size() << "]"; },
               },
               coef);
    return os.str();
}

double ModelCoefficients::lipschitz_C() const {
    return std::max({lipschitz_in_u(f1), lipschitz_in_u(f2), lipschitz_in_u(sigma1),
                     lipschitz_in_u(sigma2)});
}

bool satisfies_volatility_growth(const ModelCoefficients& coeffs, const GridSpec& grid, double R,
                                 const std::vector<double>& u_samples) {
    for (int j = 0; j < grid.n_nodes(); ++j) {
        const double x = grid.x(j);
        for (double u : u_samples) {
            const double bound = R * std::exp(-coeffs.delta * x) * (std::exp(coeffs.r * x) + std::abs(u));
            if (std::abs(evaluate(coeffs.sigma1, x, u)) > bound ||
                std::abs(evaluate(coeffs.sigma2, x, u)) > bound) {
                return false;
            }
        }
    }
    return true;
}

ModelCoefficients zero_coefficients() { return ModelCoefficients{}; }

}  // namespace rsmb
