#pragma once

#include "rsmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rsmb {

struct QuadratureOptions {
    double rel_tol = 1e-9;
    int initial_panels = 32;
    int max_depth = 48;
};

namespace detail {

template <typename Fn>
double trapezoid_refine(Fn& fn, double a, double b, double fa, double fm, double fb,
                        double abs_tol, int depth, const QuadratureOptions& opt) {
    const double h = b - a;
    const double coarse = 0.5 * h * (fa + fb);
    const double fine = 0.25 * h * (fa + 2.0 * fm + fb);
    if (std::abs(fine - coarse) <= 3.0 * abs_tol && depth > 0) {
        return fine + (fine - coarse) / 3.0;
    }
    if (depth >= opt.max_depth) {
        throw Error(ErrorKind::QuadratureFailure,
                    "adaptive trapezoid did not converge on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
    }
    const double m = a + 0.5 * h;
    const double fl = fn(a + 0.25 * h);
    const double fr = fn(a + 0.75 * h);
    return trapezoid_refine(fn, a, m, fa, fl, fm, 0.5 * abs_tol, depth + 1, opt) +
           trapezoid_refine(fn, m, b, fm, fr, fb, 0.5 * abs_tol, depth + 1, opt);
}

}  // namespace detail

/// Adaptive trapezoid rule with interval halving. Each panel is bisected until the
/// halved estimate moves by less than its share of rel_tol * (coarse integral of |f|);
/// accepted panels carry the Richardson correction. `breakpoints` (kinks, peaks)
/// split the range before the uniform initial panels are laid down.
template <typename Fn>
double adaptive_trapezoid(Fn&& fn, double a, double b, std::vector<double> breakpoints = {},
                          const QuadratureOptions& opt = {}) {
    if (!(b > a)) {
        return 0.0;
    }
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::erase_if(breakpoints, [&](double p) { return !(p >= a && p <= b); });
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    struct Panel {
        double a, b, fa, fm, fb;
    };
    std::vector<Panel> panels;
    double scale = 0.0;
    for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
        const double lo = breakpoints[s];
        const double h = (breakpoints[s + 1] - lo) / opt.initial_panels;
        double f_prev = fn(lo);
        for (int k = 0; k < opt.initial_panels; ++k) {
            const double pa = lo + k * h;
            const double pb = (k + 1 == opt.initial_panels) ? breakpoints[s + 1] : pa + h;
            const double fm = fn(0.5 * (pa + pb));
            const double fb = fn(pb);
            scale += 0.25 * (pb - pa) * (std::abs(f_prev) + 2.0 * std::abs(fm) + std::abs(fb));
            panels.push_back({pa, pb, f_prev, fm, fb});
            f_prev = fb;
        }
    }
    const double total_tol = opt.rel_tol * std::max(scale, 1e-300);
    const double width = b - a;
    double sum = 0.0;
    for (const auto& p : panels) {
        sum += detail::trapezoid_refine(fn, p.a, p.b, p.fa, p.fm, p.fb,
                                        total_tol * (p.b - p.a) / width, 0, opt);
    }
    return sum;
}

}  // namespace rsmb
