#pragma once

#include "rsmb/boundary.hpp"
#include "rsmb/coefficients.hpp"
#include "rsmb/grid.hpp"
#include "rsmb/spde.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rsmb::config {

struct GridConfig {
    DomainKind domain = CompactUnit{};
    int nx = 0;
    int nt = 0;
    double T = 0.0;

    GridSpec build() const { return build_grid(domain, nx, T, nt); }
};

/// Initial relative-frame profile: zero, or amplitude * sin(pi x / L).
struct InitialProfile {
    std::string kind = "zero";
    double amplitude = 1.0;

    Eigen::VectorXd sample(const GridSpec& grid) const;
};

struct ObstacleConfig {
    std::string method = "projected";  // projected | penalized
    double epsilon = 1e-4;
    std::string kind = "sine";  // sine: amplitude sin(pi x) min(t, t_cap); constant: value
    double amplitude = 5.0;
    double t_cap = 0.02;
    double value = -1.0;

    Field sample(const GridSpec& grid) const;
};

struct PicardConfig {
    int iterations = 12;
    double tolerance = 1e-4;
    bool compare_direct = true;
};

struct HolderConfig {
    int paths = 20;
    double q = 2.0;
    std::vector<int> time_lags{8, 256};
    std::vector<int> space_lags{1, 8};
    std::vector<int> boundary_lags{8, 64};
    double margin = 0.1;
    int threads = 1;
};

struct KernelCheckConfig {
    double t_min = 1e-4;
    double t_max = 0.1;
    int count = 9;
    double r = 0.0;
    std::vector<double> x_samples{0.5, 1.0, 2.0, 4.0};
};

struct LobConfig {
    std::string input;
    std::string format = "normalized";  // normalized | lobster
    std::string touch;                  // time,best_bid,best_ask CSV
    std::string orderbook;              // LOBSTER orderbook file (alternative to touch)
    int n_bins = 10;
    bool pool_sides = true;
    double interval = 1.0;
    long max_malformed = 0;
    double price_window = 1.0;
    std::string fit;  // fit CSV read by simulate-price
    double lap_scale = 0.2;
};

struct Config {
    GridConfig grid;
    spde::Model model;
    InitialProfile initial1;
    InitialProfile initial2;
    double p0 = 0.0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int stride = 0;
    ObstacleConfig obstacle;
    PicardConfig picard;
    HolderConfig holder;
    KernelCheckConfig kernel_check;
    LobConfig lob;

    /// resolved configuration (file + overrides, output.dir excluded) as YAML text, and its FNV-1a hash
    std::string resolved;
    std::uint64_t hash = 0;
};

/// Loads a YAML config, applies `key.path=value` overrides, then the seed and
/// output directory overrides. Throws ConfigError naming the offending field.
Config load(const std::string& path, const std::vector<std::string>& overrides = {},
            std::optional<std::uint64_t> seed = std::nullopt,
            std::optional<std::string> output_dir = std::nullopt);

/// Same, from YAML text.
Config parse(const std::string& yaml, const std::vector<std::string>& overrides = {},
             std::optional<std::uint64_t> seed = std::nullopt,
             std::optional<std::string> output_dir = std::nullopt);

std::uint64_t fnv1a(const std::string& text) noexcept;

/// "# rsmb config_hash=<hex> seed=<seed>"
std::string header_line(const Config& cfg);
std::string hash_hex(std::uint64_t hash);

}  // namespace rsmb::config
