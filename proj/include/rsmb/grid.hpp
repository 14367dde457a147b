#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <variant>

namespace rsmb {

struct CompactUnit {};

/// Truncated half-line [0, length] carrying the exponential weight of the
/// C_r spaces. An artificial Dirichlet condition is imposed at `length`.
struct HalfLine {
    double length = 4.0;
    double weight_r = 0.0;
};

using DomainKind = std::variant<CompactUnit, HalfLine>;

/// Uniform space-time grid. Nodes are x_j = j*dx, j = 0..nx, and t_i = i*dt,
/// i = 0..nt. Construct through build_grid(), which validates the explicit
/// scheme's CFL condition.
class GridSpec {
public:
    const DomainKind& domain() const noexcept { return domain_; }
    bool is_half_line() const noexcept { return std::holds_alternative<HalfLine>(domain_); }
    /// Weight r of the half-line domain, 0 on the unit interval.
    double weight_r() const noexcept;

    int nx() const noexcept { return nx_; }
    int nt() const noexcept { return nt_; }
    int n_nodes() const noexcept { return nx_ + 1; }
    int n_times() const noexcept { return nt_ + 1; }
    double horizon() const noexcept { return horizon_; }
    double length() const noexcept { return length_; }
    double dx() const noexcept { return length_ / nx_; }
    double dt() const noexcept { return horizon_ / nt_; }

    double x(int j) const noexcept { return j * dx(); }
    double t(int i) const noexcept { return i * dt(); }
    Eigen::VectorXd nodes() const { return Eigen::VectorXd::LinSpaced(n_nodes(), 0.0, length_); }

    bool operator==(const GridSpec& other) const noexcept;

private:
    friend GridSpec build_grid(const DomainKind&, int, double, int, double);
    GridSpec(DomainKind domain, int nx, double horizon, int nt, double length)
        : domain_(domain), nx_(nx), nt_(nt), horizon_(horizon), length_(length) {}

    DomainKind domain_;
    int nx_;
    int nt_;
    double horizon_;
    double length_;
};

inline constexpr double kMaxStabilityFactor = 0.5;

/// Validated grid. Throws Error{BadDimension} for nx < 4, nt < 1, T <= 0 or a
/// malformed half-line, and Error{CflViolation} when dt > stability_factor*dx^2.
GridSpec build_grid(const DomainKind& domain, int nx, double horizon, int nt,
                    double stability_factor = kMaxStabilityFactor);

/// A real function sampled on the grid: rows are time levels, columns space nodes.
struct Field {
    GridSpec grid;
    Eigen::MatrixXd values;

    explicit Field(const GridSpec& g)
        : grid(g), values(Eigen::MatrixXd::Zero(g.n_times(), g.n_nodes())) {}
    Field(const GridSpec& g, Eigen::MatrixXd v);

    int rows() const noexcept { return static_cast<int>(values.rows()); }
    int cols() const noexcept { return static_cast<int>(values.cols()); }
};

/// Sample f(t, x) on every grid node.
template <typename Fn>
Field sample_field(const GridSpec& grid, Fn&& fn) {
    Field field(grid);
    for (int i = 0; i < grid.n_times(); ++i) {
        for (int j = 0; j < grid.n_nodes(); ++j) {
            field.values(i, j) = fn(grid.t(i), grid.x(j));
        }
    }
    return field;
}

}  // namespace rsmb
