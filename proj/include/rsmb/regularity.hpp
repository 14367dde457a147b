#pragma once

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace rsmb::regularity {

enum class Axis { Time, Space };

std::string to_string(Axis axis);

/// S_q(lag) = mean |v(. + lag) - v(.)|^q, lags in grid units.
struct StructureFunction {
    std::vector<int> lags;
    std::vector<double> values;
    std::vector<long> counts;
    double q = 2.0;
};

struct HolderEstimate {
    double exponent = 0.0;
    double stderr_ = 0.0;
    std::pair<int, int> lag_range{0, 0};
    double q = 2.0;
    Axis axis = Axis::Time;
    int n_points = 0;
    int n_paths = 1;
    /// all increments vanish (constant path); exponent is reported as 0
    bool degenerate = false;
};

void to_json(nlohmann::json& j, const HolderEstimate& est);

/// 2^a, 2^{a+1}, ..., up to and including max_lag.
std::vector<int> dyadic_lags(int min_lag, int max_lag);

/// Which part of a space-time field contributes increments: indices within
/// `margin` of either end of an axis are dropped (the estimates are local).
struct Window {
    double margin = 0.1;
    /// drop the first `margin` fraction of time levels as well
    bool trim_time = true;
};

/// Structure function of a 1-D series. Throws InsufficientData when fewer than
/// 100 increments are available at the largest lag, BadDimension for q not in {1, 2}
/// or non-positive lags.
StructureFunction structure_function(const Eigen::Ref<const Eigen::VectorXd>& series,
                                     const std::vector<int>& lags, double q);

/// Structure function of a time-by-space field along one axis, increments pooled
/// over the interior window.
StructureFunction structure_function(const Eigen::Ref<const Eigen::MatrixXd>& field, Axis axis,
                                     const std::vector<int>& lags, double q,
                                     const Window& window = {});

/// Mean of several structure functions on identical lags (ensemble pooling).
StructureFunction pool(const std::vector<StructureFunction>& parts);

/// Least-squares slope of log S_q against log lag, divided by q.
HolderEstimate fit_holder(const StructureFunction& sf, Axis axis, int n_paths = 1);

HolderEstimate estimate_holder(const Eigen::Ref<const Eigen::VectorXd>& series, double q,
                               const std::vector<int>& lags);
HolderEstimate estimate_holder(const Eigen::Ref<const Eigen::MatrixXd>& field, Axis axis, double q,
                               const std::vector<int>& lags, const Window& window = {});

/// Hoelder estimate of the boundary speed series p'(t).
HolderEstimate boundary_holder(const std::vector<double>& p_prime, double q,
                               const std::vector<int>& lags);

}  // namespace rsmb::regularity
