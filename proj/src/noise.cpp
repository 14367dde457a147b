#include "rsmb/noise.hpp"

#include "rsmb/errors.hpp"

#include <cmath>
#include <numbers>

namespace rsmb {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr double to_unit(std::uint64_t bits) noexcept {
    // 53 random bits -> [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

double keyed_normal(std::uint64_t seed, std::uint32_t stream, std::uint64_t i, std::uint64_t j) noexcept {
    std::uint64_t h = splitmix64(seed ^ (0xD1B54A32D192ED03ULL * (std::uint64_t{stream} + 1)));
    h = splitmix64(h ^ (i * 0xAEF17502108EF2D9ULL));
    h = splitmix64(h ^ (j * 0xF1357AEA2E62A9C5ULL));
    const double u1 = 1.0 - to_unit(splitmix64(h));  // (0, 1]
    const double u2 = to_unit(splitmix64(h ^ 0x2545F4914F6CDD1DULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void noise_row(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream, int i,
               Eigen::Ref<Eigen::VectorXd> out) {
    if (out.size() != grid.n_nodes()) {
        throw Error(ErrorKind::DimensionMismatch, "noise row has wrong length");
    }
    const double scale = 1.0 / std::sqrt(grid.dx() * grid.dt());
    for (int j = 0; j < grid.n_nodes(); ++j) {
        out[j] = scale * keyed_normal(seed, stream, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j));
    }
}

NoiseField sample_white_noise(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream) {
    NoiseField noise{grid, seed, stream, Eigen::MatrixXd(grid.nt(), grid.n_nodes())};
    Eigen::VectorXd row(grid.n_nodes());
    for (int i = 0; i < grid.nt(); ++i) {
        noise_row(grid, seed, stream, i, row);
        noise.xi.row(i) = row.transpose();
    }
    return noise;
}

NoiseField zero_noise(const GridSpec& grid, std::uint32_t stream) {
    return NoiseField{grid, 0, stream, Eigen::MatrixXd::Zero(grid.nt(), grid.n_nodes())};
}

}  // namespace rsmb
