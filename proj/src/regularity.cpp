#include "rsmb/regularity.hpp"

#include "rsmb/errors.hpp"

#include <cmath>

namespace rsmb::regularity {

namespace {

constexpr long kMinIncrements = 100;

void check_request(const std::vector<int>& lags, double q) {
    if (q != 1.0 && q != 2.0) {
        throw Error(ErrorKind::BadDimension, "moment order q must be 1 or 2");
    }
    if (lags.empty()) {
        throw Error(ErrorKind::BadDimension, "no lags requested");
    }
    for (int lag : lags) {
        if (lag <= 0) {
            throw Error(ErrorKind::BadDimension, "lags must be positive");
        }
    }
}

void require_increments(long count, int lag) {
    if (count < kMinIncrements) {
        throw Error(ErrorKind::InsufficientData,
                    std::to_string(count) + " increments at lag " + std::to_string(lag) +
                        ", need at least " + std::to_string(kMinIncrements));
    }
}

}  // namespace

std::string to_string(Axis axis) { return axis == Axis::Time ? "time" : "space"; }

void to_json(nlohmann::json& j, const HolderEstimate& est) {
    j = nlohmann::json{{"schema", 1},
                       {"axis", to_string(est.axis)},
                       {"q", est.q},
                       {"exponent", est.exponent},
                       {"stderr", est.stderr_},
                       {"lag_range", {est.lag_range.first, est.lag_range.second}},
                       {"n_points", est.n_points},
                       {"n_paths", est.n_paths},
                       {"degenerate", est.degenerate}};
}

std::vector<int> dyadic_lags(int min_lag, int max_lag) {
    if (min_lag < 1 || max_lag < min_lag) {
        throw Error(ErrorKind::BadDimension, "need 1 <= min_lag <= max_lag");
    }
    std::vector<int> lags;
    for (long lag = min_lag; lag <= max_lag; lag *= 2) {
        lags.push_back(static_cast<int>(lag));
    }
    return lags;
}

StructureFunction structure_function(const Eigen::Ref<const Eigen::VectorXd>& series,
                                     const std::vector<int>& lags, double q) {
    check_request(lags, q);
    StructureFunction sf{lags, {}, {}, q};
    const Eigen::Index n = series.size();
    for (int lag : lags) {
        const long count = std::max<long>(0, n - lag);
        require_increments(count, lag);
        const auto diff = series.tail(count) - series.head(count);
        const double sum = q == 2.0 ? diff.squaredNorm() : diff.cwiseAbs().sum();
        sf.values.push_back(sum / static_cast<double>(count));
        sf.counts.push_back(count);
    }
    return sf;
}

StructureFunction structure_function(const Eigen::Ref<const Eigen::MatrixXd>& field, Axis axis,
                                     const std::vector<int>& lags, double q, const Window& window) {
    check_request(lags, q);
    if (!(window.margin >= 0.0 && window.margin < 0.5)) {
        throw Error(ErrorKind::BadDimension, "window margin must lie in [0, 0.5)");
    }
    const auto rows = field.rows();
    const auto cols = field.cols();
    const auto t0 = window.trim_time ? static_cast<Eigen::Index>(std::ceil(window.margin * rows)) : 0;
    const auto x0 = static_cast<Eigen::Index>(std::ceil(window.margin * (cols - 1)));
    const auto x1 = cols - 1 - x0;  // last interior column kept

    StructureFunction sf{lags, {}, {}, q};
    for (int lag : lags) {
        double sum = 0.0;
        long count = 0;
        if (axis == Axis::Time) {
            const Eigen::Index n_rows = std::max<Eigen::Index>(0, rows - t0 - lag);
            if (n_rows > 0 && x1 >= x0) {
                const auto a = field.block(t0, x0, n_rows, x1 - x0 + 1);
                const auto b = field.block(t0 + lag, x0, n_rows, x1 - x0 + 1);
                sum = q == 2.0 ? (b - a).squaredNorm() : (b - a).cwiseAbs().sum();
                count = static_cast<long>(n_rows * (x1 - x0 + 1));
            }
        } else {
            const Eigen::Index n_cols = std::max<Eigen::Index>(0, x1 - x0 + 1 - lag);
            const Eigen::Index n_rows = rows - t0;
            if (n_cols > 0 && n_rows > 0) {
                const auto a = field.block(t0, x0, n_rows, n_cols);
                const auto b = field.block(t0, x0 + lag, n_rows, n_cols);
                sum = q == 2.0 ? (b - a).squaredNorm() : (b - a).cwiseAbs().sum();
                count = static_cast<long>(n_rows * n_cols);
            }
        }
        require_increments(count, lag);
        sf.values.push_back(sum / static_cast<double>(count));
        sf.counts.push_back(count);
    }
    return sf;
}

StructureFunction pool(const std::vector<StructureFunction>& parts) {
    if (parts.empty()) {
        throw Error(ErrorKind::InsufficientData, "nothing to pool");
    }
    StructureFunction out = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) {
        if (parts[k].lags != out.lags || parts[k].q != out.q) {
            throw Error(ErrorKind::DimensionMismatch, "pooled structure functions differ in lags or q");
        }
        for (std::size_t l = 0; l < out.values.size(); ++l) {
            out.values[l] += parts[k].values[l];
            out.counts[l] += parts[k].counts[l];
        }
    }
    for (double& v : out.values) {
        v /= static_cast<double>(parts.size());
    }
    return out;
}

HolderEstimate fit_holder(const StructureFunction& sf, Axis axis, int n_paths) {
    const auto n = static_cast<int>(sf.lags.size());
    if (n < 4) {
        throw Error(ErrorKind::InsufficientData, "a Hoelder fit needs at least 4 lags");
    }
    HolderEstimate est;
    est.q = sf.q;
    est.axis = axis;
    est.n_points = n;
    est.n_paths = n_paths;
    est.lag_range = {sf.lags.front(), sf.lags.back()};
    for (double v : sf.values) {
        if (!(v > 0.0)) {
            est.degenerate = true;
            return est;
        }
    }
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd y(n);
    for (int k = 0; k < n; ++k) {
        design(k, 0) = 1.0;
        design(k, 1) = std::log(static_cast<double>(sf.lags[static_cast<std::size_t>(k)]));
        y[k] = std::log(sf.values[static_cast<std::size_t>(k)]);
    }
    const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - design * beta;
    const Eigen::VectorXd xc = design.col(1).array() - design.col(1).mean();
    const double sxx = xc.squaredNorm();
    const double s2 = resid.squaredNorm() / (n - 2);
    est.exponent = beta[1] / sf.q;
    est.stderr_ = std::sqrt(s2 / sxx) / sf.q;
    return est;
}

HolderEstimate estimate_holder(const Eigen::Ref<const Eigen::VectorXd>& series, double q,
                               const std::vector<int>& lags) {
    return fit_holder(structure_function(series, lags, q), Axis::Time);
}

HolderEstimate estimate_holder(const Eigen::Ref<const Eigen::MatrixXd>& field, Axis axis, double q,
                               const std::vector<int>& lags, const Window& window) {
    return fit_holder(structure_function(field, axis, lags, q, window), axis);
}

HolderEstimate boundary_holder(const std::vector<double>& p_prime, double q,
                               const std::vector<int>& lags) {
    const Eigen::Map<const Eigen::VectorXd> series(p_prime.data(),
                                                   static_cast<Eigen::Index>(p_prime.size()));
    return estimate_holder(series, q, lags);
}

}  // namespace rsmb::regularity
