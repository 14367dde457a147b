#pragma once

#include "rsmb/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace rsmb {

/// Dirichlet heat kernels for dz/dt = z'' (no factor 1/2):
///   H    on [0,1]   (method of images),
///   G    on [0,inf) (two-term reflection),
///   G_r  = exp(-r(x-y)) G, the kernel seen by C_r-weighted norms.
namespace kernel {

enum class Kind { Compact, HalfLine };

/// Image count that keeps the truncated series exact to ~1e-13 for t <= horizon:
/// the first dropped image sits at distance >= 2n - 1, so its weight is below
/// exp(-(2n-1)^2 / (4 horizon)).
inline int default_images(double horizon) {
    const double reach = std::sqrt(4.0 * std::max(horizon, 0.0) * 32.0);
    return std::max(3, static_cast<int>(std::ceil(0.5 * (1.0 + reach))));
}

namespace detail {
inline void require_positive(double t) {
    if (!(t > 0.0)) {
        throw Error(ErrorKind::NonPositiveTime, "kernel time must be > 0, got " + std::to_string(t));
    }
}
}  // namespace detail

template <typename Scalar>
Scalar gaussian_1d(Scalar t, Scalar d) {
    using std::exp;
    using std::sqrt;
    return exp(-d * d / (Scalar(4) * t)) / sqrt(Scalar(4) * std::numbers::pi_v<Scalar> * t);
}

template <typename Scalar>
Scalar eval_H(Scalar t, Scalar x, Scalar y, int n_images) {
    detail::require_positive(static_cast<double>(t));
    using std::exp;
    const Scalar four_t = Scalar(4) * t;
    Scalar sum = 0;
    for (int n = -n_images; n <= n_images; ++n) {
        const Scalar a = x - y + Scalar(2 * n);
        const Scalar b = x + y + Scalar(2 * n);
        sum += exp(-a * a / four_t) - exp(-b * b / four_t);
    }
    using std::sqrt;
    return sum / sqrt(four_t * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar eval_G(Scalar t, Scalar x, Scalar y) {
    detail::require_positive(static_cast<double>(t));
    return gaussian_1d(t, x - y) - gaussian_1d(t, x + y);
}

template <typename Scalar>
Scalar eval_G_r(Scalar t, Scalar x, Scalar y, Scalar r) {
    using std::exp;
    return exp(-r * (x - y)) * eval_G(t, x, y);
}

/// d/dy of H (image series differentiated term by term) or of G.
template <typename Scalar>
Scalar deriv_y(Kind kind, Scalar t, Scalar x, Scalar y, int n_images = 0) {
    detail::require_positive(static_cast<double>(t));
    const Scalar two_t = Scalar(2) * t;
    if (kind == Kind::HalfLine) {
        return (x - y) / two_t * gaussian_1d(t, x - y) + (x + y) / two_t * gaussian_1d(t, x + y);
    }
    Scalar sum = 0;
    for (int n = -n_images; n <= n_images; ++n) {
        const Scalar a = x - y + Scalar(2 * n);
        const Scalar b = x + y + Scalar(2 * n);
        sum += a / two_t * gaussian_1d(t, a) + b / two_t * gaussian_1d(t, b);
    }
    return sum;
}

/// Exact integral of H(t, x, .) over [a, b] (sum of erf differences).
template <typename Scalar>
Scalar integral_H(Scalar t, Scalar x, Scalar a, Scalar b, int n_images) {
    detail::require_positive(static_cast<double>(t));
    using std::erf;
    using std::sqrt;
    const Scalar s = Scalar(2) * sqrt(t);
    Scalar sum = 0;
    for (int n = -n_images; n <= n_images; ++n) {
        const Scalar shift = Scalar(2 * n);
        // integral of the direct image minus the reflected image
        sum += erf((x - a + shift) / s) - erf((x - b + shift) / s);
        sum -= erf((x + b + shift) / s) - erf((x + a + shift) / s);
    }
    return Scalar(0.5) * sum;
}

}  // namespace kernel

/// Outcome of a numerical check of a heat-kernel estimate: value(t) is the
/// quantity being bounded, scaled(t) = value(t) * t^exponent should stay bounded.
struct BoundReport {
    std::string estimate_name;
    double scaling_exponent = 0.5;
    std::vector<double> t_values;
    std::vector<double> values;
    std::vector<double> scaled_values;
    double sup_value = 0.0;
    double scaled_sup = 0.0;
    /// scaled(t) at the smallest t exceeds twice its value at the middle of the range
    bool growth_flag = false;
};

void to_json(nlohmann::json& j, const BoundReport& report);

/// sup_x int_0^inf e^{-r(x-y)} |dG/dy|(t,x,y) dy for each t, scaled by sqrt(t).
BoundReport verify_kernel_bounds(const std::vector<double>& t_values,
                                 const std::vector<double>& x_samples, double r);

/// sup_x int_0^1 |dH/dy|(t,x,y) dy for each t, scaled by sqrt(t).
BoundReport verify_compact_derivative_bound(const std::vector<double>& t_values,
                                            const std::vector<double>& x_samples, int n_images);

/// sup_x int_0^tau int_0^1 H(u,x,z)^2 dz du for each tau, scaled by tau^{-1/2}
/// (time modulus of the stochastic convolution).
BoundReport verify_compact_l2_time_bound(const std::vector<double>& tau_values,
                                         const std::vector<double>& x_samples, int n_images);

/// Log-spaced sample of [t_min, t_max].
std::vector<double> log_spaced(double t_min, double t_max, int count);

}  // namespace rsmb
