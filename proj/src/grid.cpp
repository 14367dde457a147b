#include "rsmb/grid.hpp"

#include "rsmb/errors.hpp"

#include <cmath>
#include <string>

namespace rsmb {

double GridSpec::weight_r() const noexcept {
    if (const auto* half = std::get_if<HalfLine>(&domain_)) {
        return half->weight_r;
    }
    return 0.0;
}

bool GridSpec::operator==(const GridSpec& other) const noexcept {
    if (domain_.index() != other.domain_.index()) {
        return false;
    }
    if (const auto* half = std::get_if<HalfLine>(&domain_)) {
        const auto& rhs = std::get<HalfLine>(other.domain_);
        if (half->length != rhs.length || half->weight_r != rhs.weight_r) {
            return false;
        }
    }
    return nx_ == other.nx_ && nt_ == other.nt_ && horizon_ == other.horizon_;
}

GridSpec build_grid(const DomainKind& domain, int nx, double horizon, int nt,
                    double stability_factor) {
    if (nx < 4) {
        throw Error(ErrorKind::BadDimension, "nx must be >= 4, got " + std::to_string(nx));
    }
    if (nt < 1) {
        throw Error(ErrorKind::BadDimension, "nt must be >= 1, got " + std::to_string(nt));
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorKind::BadDimension, "horizon T must be finite and > 0");
    }
    if (!(stability_factor > 0.0) || stability_factor > kMaxStabilityFactor) {
        throw Error(ErrorKind::BadDimension, "stability factor must lie in (0, 0.5]");
    }
    double length = 1.0;
    if (const auto* half = std::get_if<HalfLine>(&domain)) {
        if (!(half->length >= 1.0) || !std::isfinite(half->length)) {
            throw Error(ErrorKind::BadDimension, "half-line truncation length must be >= 1");
        }
        if (!std::isfinite(half->weight_r)) {
            throw Error(ErrorKind::BadDimension, "half-line weight r must be finite");
        }
        length = half->length;
    }
    const double dx = length / nx;
    const double dt = horizon / nt;
    if (dt > stability_factor * dx * dx) {
        throw Error(ErrorKind::CflViolation,
                    "dt=" + std::to_string(dt) + " exceeds " + std::to_string(stability_factor) +
                        "*dx^2=" + std::to_string(stability_factor * dx * dx));
    }
    return GridSpec(domain, nx, horizon, nt, length);
}

Field::Field(const GridSpec& g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {
    if (values.rows() != g.n_times() || values.cols() != g.n_nodes()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "field values are " + std::to_string(values.rows()) + "x" +
                        std::to_string(values.cols()) + ", grid expects " +
                        std::to_string(g.n_times()) + "x" + std::to_string(g.n_nodes()));
    }
}

}  // namespace rsmb
