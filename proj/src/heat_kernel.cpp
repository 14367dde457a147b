#include "rsmb/heat_kernel.hpp"

#include "rsmb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsmb {

void to_json(nlohmann::json& j, const BoundReport& report) {
    j = nlohmann::json{{"schema", 1},
                       {"estimate_name", report.estimate_name},
                       {"scaling_exponent", report.scaling_exponent},
                       {"t_values", report.t_values},
                       {"values", report.values},
                       {"scaled_values", report.scaled_values},
                       {"sup_value", report.sup_value},
                       {"scaled_sup", report.scaled_sup},
                       {"growth_flag", report.growth_flag}};
}

std::vector<double> log_spaced(double t_min, double t_max, int count) {
    std::vector<double> out;
    if (count <= 1) {
        out.push_back(t_min);
        return out;
    }
    const double ratio = std::log(t_max / t_min) / (count - 1);
    for (int k = 0; k < count; ++k) {
        out.push_back(k + 1 == count ? t_max : t_min * std::exp(ratio * k));
    }
    return out;
}

namespace {

template <typename ValueFn>
BoundReport build_report(std::string name, double exponent, const std::vector<double>& t_values,
                         ValueFn&& value_at) {
    for (double t : t_values) {
        kernel::detail::require_positive(t);
    }
    BoundReport report;
    report.estimate_name = std::move(name);
    report.scaling_exponent = exponent;
    report.t_values = t_values;
    for (double t : t_values) {
        const double value = value_at(t);
        report.values.push_back(value);
        report.scaled_values.push_back(value * std::pow(t, exponent));
    }
    if (!report.values.empty()) {
        report.sup_value = *std::max_element(report.values.begin(), report.values.end());
        report.scaled_sup =
            *std::max_element(report.scaled_values.begin(), report.scaled_values.end());
        const auto smallest = std::distance(
            report.t_values.begin(), std::min_element(report.t_values.begin(), report.t_values.end()));
        std::vector<double> sorted = report.scaled_values;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double middle = sorted[sorted.size() / 2];
        report.growth_flag = !std::isfinite(report.scaled_sup) ||
                             report.scaled_values[static_cast<std::size_t>(smallest)] > 2.0 * middle;
    }
    return report;
}

}  // namespace

BoundReport verify_kernel_bounds(const std::vector<double>& t_values,
                                 const std::vector<double>& x_samples, double r) {
    return build_report("halfline_weighted_derivative", 0.5, t_values, [&](double t) {
        double best = 0.0;
        const double sd = std::sqrt(t);
        for (double x : x_samples) {
            const double upper = x + 12.0 * sd + 12.0 * t * std::abs(r);
            auto integrand = [&](double y) {
                return std::exp(-r * (x - y)) *
                       std::abs(kernel::deriv_y(kernel::Kind::HalfLine, t, x, y));
            };
            const double value =
                adaptive_trapezoid(integrand, 0.0, upper, {x - 2.0 * sd, x, x + 2.0 * sd});
            best = std::max(best, value);
        }
        return best;
    });
}

BoundReport verify_compact_derivative_bound(const std::vector<double>& t_values,
                                            const std::vector<double>& x_samples, int n_images) {
    return build_report("compact_derivative", 0.5, t_values, [&](double t) {
        double best = 0.0;
        const double sd = std::sqrt(t);
        for (double x : x_samples) {
            auto integrand = [&](double y) {
                return std::abs(kernel::deriv_y(kernel::Kind::Compact, t, x, y, n_images));
            };
            best = std::max(best, adaptive_trapezoid(integrand, 0.0, 1.0,
                                                     {x - 2.0 * sd, x, x + 2.0 * sd}));
        }
        return best;
    });
}

BoundReport verify_compact_l2_time_bound(const std::vector<double>& tau_values,
                                         const std::vector<double>& x_samples, int n_images) {
    return build_report("compact_l2_time", -0.5, tau_values, [&](double tau) {
        double best = 0.0;
        for (double x : x_samples) {
            // u = s^2 removes the u^{-1/2} singularity of the inner integral at u = 0
            auto outer = [&](double s) {
                if (s <= 0.0) {
                    // small-u limit of 2 s int H^2 dz = 2 s / sqrt(8 pi u)
                    return (x > 0.0 && x < 1.0) ? 2.0 / std::sqrt(8.0 * std::numbers::pi) : 0.0;
                }
                const double u = s * s;
                const double sd = std::sqrt(u);
                auto inner = [&](double z) {
                    const double h = kernel::eval_H(u, x, z, n_images);
                    return h * h;
                };
                QuadratureOptions opt;
                opt.rel_tol = 1e-8;
                opt.initial_panels = 16;
                return 2.0 * s *
                       adaptive_trapezoid(inner, 0.0, 1.0, {x - 3.0 * sd, x, x + 3.0 * sd}, opt);
            };
            QuadratureOptions opt;
            opt.rel_tol = 1e-7;
            opt.initial_panels = 16;
            best = std::max(best, adaptive_trapezoid(outer, 0.0, std::sqrt(tau), {}, opt));
        }
        return best;
    });
}

}  // namespace rsmb
