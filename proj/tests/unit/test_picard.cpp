#include "rsmb/heat_kernel.hpp"
#include "rsmb/picard.hpp"
#include "rsmb/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rsmb;
using namespace rsmb::picard;

namespace {

Eigen::VectorXd sine(const GridSpec& g, double amp = 1.0) {
    Eigen::VectorXd v = (amp * (std::numbers::pi * g.nodes().array()).sin()).matrix();
    v[0] = 0.0;
    v[g.nx()] = 0.0;
    return v;
}

Eigen::VectorXd zeros(const GridSpec& g) { return Eigen::VectorXd::Zero(g.n_nodes()); }

Pair zero_pair(const GridSpec& g) { return Pair{Field(g), Field(g)}; }

spde::Model lipschitz_model() {
    spde::Model m;
    m.coeffs.f1 = AffineCoef{0.5, -0.5};
    m.coeffs.f2 = AffineCoef{0.5, -0.5};
    m.coeffs.sigma1 = SineCoef{0.5, 0.2};
    m.coeffs.sigma2 = SineCoef{0.5, 0.2};
    m.boundary.kind = boundary::ExpImbalance{5.0, 100.0};
    m.boundary.clamp = 2.0;
    return m;
}

int iterations_to(const IterationReport& r, double tol) {
    for (std::size_t n = 0; n < r.d.size(); ++n) {
        if (r.d[n] < tol) {
            return static_cast<int>(n + 1);
        }
    }
    return static_cast<int>(r.d.size()) + 1;
}

}  // namespace

TEST_SUITE("picard") {

TEST_CASE("kernel cache tables") {
    const auto g = build_grid(CompactUnit{}, 16, 0.01, 256);
    const KernelCache cache(g);
    CHECK(cache.stacked(1).rows() == 2 * g.n_nodes());
    CHECK(cache.stacked(1).cols() == g.n_nodes());
    // a cell integral of the kernel equals the erf closed form at the midpoint time
    const double tau = 2.5 * g.dt();
    CHECK(cache.cell_integral(tau, 0.5, 0.25, 0.5) ==
          doctest::Approx(kernel::integral_H(tau, 0.5, 0.25, 0.5, 8)).epsilon(1e-12));
    const auto init = cache.initial_term(sine(g));
    CHECK(init.rows() == g.n_times());
    CHECK(init.row(0).transpose() == sine(g));
    const double decay = std::exp(-std::numbers::pi * std::numbers::pi * g.horizon());
    CHECK((init.row(g.nt()).transpose() - decay * sine(g)).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("zero data has the zero mild solution") {
    const auto g = build_grid(CompactUnit{}, 16, 0.02, 512);
    spde::Model m;
    const KernelCache cache(g);
    const auto w = mild_solve_w(zero_pair(g), zeros(g), zeros(g), m, zero_noise(g, kStreamBid),
                                zero_noise(g, kStreamAsk), cache);
    CHECK(w.v1.values.isZero(0.0));
    CHECK(w.v2.values.isZero(0.0));

    const auto report = picard_iterate(zeros(g), zeros(g), m, zero_noise(g, kStreamBid),
                                       zero_noise(g, kStreamAsk), 5);
    REQUIRE_FALSE(report.d.empty());
    CHECK(report.d.front() == 0.0);
    CHECK(report.converged);
}

TEST_CASE("constant drift matches the finite difference run") {
    const auto g = build_grid(CompactUnit{}, 32, 0.05, 2048);
    spde::Model m;
    m.coeffs.f1 = ConstantCoef{1.0};
    const KernelCache cache(g);
    const auto w = mild_solve_w(zero_pair(g), zeros(g), zeros(g), m, zero_noise(g, kStreamBid),
                                zero_noise(g, kStreamAsk), cache);
    const auto direct = spde::run_relative_frame(zeros(g), zeros(g), 0.0, m, zero_noise(g, kStreamBid),
                                                 zero_noise(g, kStreamAsk), spde::RunOptions{1});
    CHECK((w.v1.values - direct.v1).cwiseAbs().maxCoeff() <= 2e-3);
}

TEST_CASE("initial data propagates by the heat semigroup") {
    const auto g = build_grid(CompactUnit{}, 32, 0.05, 2048);
    spde::Model m;
    const KernelCache cache(g);
    const auto w = mild_solve_w(zero_pair(g), sine(g), zeros(g), m, zero_noise(g, kStreamBid),
                                zero_noise(g, kStreamAsk), cache);
    for (int i : {256, 1024, 2048}) {
        const double decay = std::exp(-std::numbers::pi * std::numbers::pi * g.t(i));
        CHECK((w.v1.values.row(i).transpose() - decay * sine(g)).cwiseAbs().maxCoeff() <= 1e-3);
    }
}

TEST_CASE("iterates are reflected and contract") {
    const auto g = build_grid(CompactUnit{}, 16, 0.05, 1024);
    const auto m = lipschitz_model();
    const auto xi1 = sample_white_noise(g, 11, kStreamBid);
    const auto xi2 = sample_white_noise(g, 11, kStreamAsk);
    auto report = picard_iterate(sine(g), sine(g, 0.5), m, xi1, xi2, 10);
    REQUIRE(report.final_pair);
    const auto& pair = *report.final_pair;
    CHECK(pair.v1.values.minCoeff() >= 0.0);
    CHECK(pair.v2.values.minCoeff() >= 0.0);
    CHECK(pair.v1.values.col(0).isZero(0.0));
    CHECK(pair.v1.values.col(16).isZero(0.0));
    for (std::size_t n = 2; n < report.d.size(); ++n) {
        CHECK(report.d[n] <= 0.8 * report.d[n - 1]);
    }
    CHECK(report.d.back() < 1e-4);
    const double gap = gap_vs_direct(report, sine(g), sine(g, 0.5), m, xi1, xi2);
    CHECK(gap <= 5 * (g.dx() + std::sqrt(g.dt())));
    CHECK(report.final_gap_vs_direct == gap);

    const nlohmann::json j = report;
    CHECK(j["schema"] == 1);
    CHECK(j["d"].size() == report.d.size());
    CHECK(j["iters"] == report.iters);
    CHECK(j.contains("converged"));
    CHECK(j["final_gap_vs_direct"].get<double>() == gap);
}

TEST_CASE("longer horizons contract more slowly") {
    const auto m = lipschitz_model();
    std::vector<double> d3;
    std::vector<int> needed;
    for (int nt : {256, 512, 1024}) {
        const double T = nt * (0.05 / 1024);
        const auto g = build_grid(CompactUnit{}, 16, T, nt);
        const auto r = picard_iterate(sine(g), sine(g, 0.5), m, sample_white_noise(g, 5, kStreamBid),
                                      sample_white_noise(g, 5, kStreamAsk), 10);
        d3.push_back(r.d[2]);
        needed.push_back(iterations_to(r, 1e-5));
    }
    CHECK(d3[0] < d3[1]);
    CHECK(d3[1] < d3[2]);
    CHECK(needed[0] <= needed[1]);
    CHECK(needed[1] <= needed[2]);
}

TEST_CASE("argument checks") {
    const auto g = build_grid(CompactUnit{}, 16, 0.01, 256);
    spde::Model m;
    CHECK_THROWS_AS(picard_iterate(zeros(g), zeros(g), m, zero_noise(g), zero_noise(g, kStreamAsk), 1), Error);
    m.lap_scale = 0.2;
    CHECK_THROWS_AS(picard_iterate(zeros(g), zeros(g), m, zero_noise(g), zero_noise(g, kStreamAsk), 4), Error);
}

}
