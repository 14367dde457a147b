#pragma once

// Exact fractional Gaussian noise by circulant embedding (Davies-Harte).

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <random>

namespace testsupport {

/// Fractional Brownian path of length n + 1 (starting at 0) with Hurst index H,
/// unit step variance.
inline Eigen::VectorXd fractional_brownian(int n, double H, std::uint64_t seed) {
    const int m = 2 * n;
    auto gamma = [H](double k) {
        return 0.5 * (std::pow(std::abs(k + 1), 2 * H) - 2 * std::pow(std::abs(k), 2 * H) +
                      std::pow(std::abs(k - 1), 2 * H));
    };
    std::vector<double> row(static_cast<std::size_t>(m));
    for (int k = 0; k <= n; ++k) {
        row[static_cast<std::size_t>(k)] = gamma(k);
    }
    for (int k = n + 1; k < m; ++k) {
        row[static_cast<std::size_t>(k)] = gamma(m - k);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> eig;
    fft.fwd(eig, row);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::complex<double>> w(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double lam = std::max(eig[static_cast<std::size_t>(k)].real(), 0.0);
        w[static_cast<std::size_t>(k)] = std::sqrt(lam / m) * std::complex<double>(normal(rng), normal(rng));
    }
    std::vector<std::complex<double>> z;
    fft.fwd(z, w);
    Eigen::VectorXd path(n + 1);
    path[0] = 0.0;
    for (int k = 0; k < n; ++k) {
        path[k + 1] = path[k] + z[static_cast<std::size_t>(k)].real();
    }
    return path;
}

}  // namespace testsupport
