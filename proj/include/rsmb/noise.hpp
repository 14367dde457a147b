#pragma once

#include "rsmb/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace rsmb {

/// Stream ids of the two driving noises. The second profile lives on the other
/// side of the boundary, so in the relative frame its noise is an independent
/// white noise.
inline constexpr std::uint32_t kStreamBid = 0;
inline constexpr std::uint32_t kStreamAsk = 1;

/// Standard normal sample addressed by (seed, stream, i, j). Stateless: any cell
/// can be regenerated without touching the others.
double keyed_normal(std::uint64_t seed, std::uint32_t stream, std::uint64_t i, std::uint64_t j) noexcept;

/// Discretized space-time white noise: xi(i, j) is the cell average of W-dot
/// over [t_i, t_{i+1}) x (cell of node j), i.e. N(0, 1/(dx*dt)).
struct NoiseField {
    GridSpec grid;
    std::uint64_t seed = 0;
    std::uint32_t stream = kStreamBid;
    Eigen::MatrixXd xi;  // nt x n_nodes

    Eigen::VectorXd row(int i) const { return xi.row(i).transpose(); }
};

NoiseField sample_white_noise(const GridSpec& grid, std::uint64_t seed,
                              std::uint32_t stream = kStreamBid);

/// Row i of sample_white_noise(grid, seed, stream), computed on its own.
void noise_row(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream, int i,
               Eigen::Ref<Eigen::VectorXd> out);

/// An all-zero noise field (deterministic runs).
NoiseField zero_noise(const GridSpec& grid, std::uint32_t stream = kStreamBid);

}  // namespace rsmb
