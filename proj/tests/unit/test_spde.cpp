#include "rsmb/spde.hpp"
#include "rsmb/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace rsmb;
using namespace rsmb::spde;

namespace {

Eigen::VectorXd sine(const GridSpec& g, double amp = 1.0) {
    return (amp * (std::numbers::pi * g.nodes().array() / g.length()).sin()).matrix().eval().unaryExpr(
        [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; });
}

Eigen::VectorXd zeros(const GridSpec& g) { return Eigen::VectorXd::Zero(g.n_nodes()); }

Model noisy_model(double M = INFINITY, double M_max = INFINITY) {
    Model m;
    m.coeffs.f1 = ConstantCoef{0.5};
    m.coeffs.f2 = ConstantCoef{0.2};
    m.coeffs.sigma1 = ConstantCoef{1.0};
    m.coeffs.sigma2 = ConstantCoef{1.0};
    m.boundary.kind = boundary::ExpImbalance{5.0, 100.0};
    m.boundary.clamp = 2.0;
    m.M = M;
    m.M_max = M_max;
    if (std::isfinite(M)) {
        m.boundary.truncation_M = M;
    }
    return m;
}

}  // namespace

TEST_SUITE("spde_core") {

TEST_CASE("zero data is a fixed point") {
    const auto g = build_grid(CompactUnit{}, 16, 0.01, 512);
    Model m;
    auto s = initial_state(zeros(g), zeros(g), 1.5, m, g);
    const Stepper stepper(m, g);
    for (int i = 0; i < 10; ++i) {
        stepper.step(s, zeros(g), zeros(g));
    }
    CHECK(s.v1.isZero(0.0));
    CHECK(s.v2.isZero(0.0));
    CHECK(s.p == 1.5);
    CHECK(s.p_prime == 0.0);
    CHECK(s.step == 10);
    CHECK(s.time == doctest::Approx(10 * g.dt()));
}

TEST_CASE("constant forcing relaxes to the stationary parabola") {
    const auto g = build_grid(CompactUnit{}, 64, 1.0, 16384);
    Model m;
    m.coeffs.f1 = ConstantCoef{1.0};
    const auto traj = run_relative_frame(zeros(g), zeros(g), 0.0, m, zero_noise(g, kStreamBid),
                                         zero_noise(g, kStreamAsk));
    const Eigen::ArrayXd x = g.nodes().array();
    const Eigen::VectorXd expected = (x * (1 - x) / 2).matrix();
    CHECK((traj.final_state.v1 - expected).cwiseAbs().maxCoeff() <= 2e-3);
    CHECK(traj.final_state.v2.isZero(0.0));
}

TEST_CASE("heat eigenfunction decays at rate pi squared") {
    const auto g = build_grid(CompactUnit{}, 64, 0.05, 4096);
    Model m;
    const auto traj = run_relative_frame(sine(g), sine(g, 0.5), 0.0, m, zero_noise(g, kStreamBid),
                                         zero_noise(g, kStreamAsk));
    const double decay = std::exp(-std::numbers::pi * std::numbers::pi * 0.05);
    CHECK((traj.final_state.v1 - decay * sine(g)).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK((traj.final_state.v2 - decay * sine(g, 0.5)).cwiseAbs().maxCoeff() <= 1e-3);
    // maximum principle with f = 0
    for (std::size_t k = 1; k < traj.norm1.size(); ++k) {
        CHECK(traj.norm1[k] <= traj.norm1[k - 1]);
    }
}

TEST_CASE("lap_scale slows diffusion") {
    const auto g = build_grid(CompactUnit{}, 32, 0.05, 4096);
    Model m;
    m.lap_scale = 0.2;
    const auto traj = run_relative_frame(sine(g), sine(g), 0.0, m, zero_noise(g, kStreamBid),
                                         zero_noise(g, kStreamAsk));
    const double decay = std::exp(-0.2 * std::numbers::pi * std::numbers::pi * 0.05);
    CHECK((traj.final_state.v1 - decay * sine(g)).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("noisy runs stay nonnegative with zero Dirichlet nodes") {
    const auto g = build_grid(CompactUnit{}, 32, 0.05, 2048);
    Model m;
    m.coeffs.sigma1 = ConstantCoef{1.0};
    m.coeffs.sigma2 = ConstantCoef{1.0};
    const auto traj = run_relative_frame(zeros(g), zeros(g), 0.0, m, g, 9, RunOptions{1});
    CHECK(traj.v1.rows() == g.n_times());
    CHECK(traj.v1.minCoeff() >= 0.0);
    CHECK(traj.v2.minCoeff() >= 0.0);
    CHECK(traj.v1.col(0).isZero(0.0));
    CHECK(traj.v1.col(32).isZero(0.0));
    CHECK(traj.v2.col(0).isZero(0.0));
    CHECK(traj.v1.maxCoeff() > 0.0);
    CHECK(traj.p.back() == 0.0);
}

TEST_CASE("same seed gives identical trajectory bytes") {
    const auto g = build_grid(CompactUnit{}, 32, 0.05, 2048);
    const auto m = noisy_model();
    auto dump = [&](std::uint64_t seed) {
        const auto traj = run_relative_frame(sine(g), sine(g, 0.5), 0.0, m, g, seed, RunOptions{256});
        std::ostringstream out;
        write_trajectory_csv(out, traj);
        write_profiles_csv(out, traj);
        return out.str();
    };
    const auto a = dump(5);
    CHECK(a == dump(5));
    CHECK(a != dump(6));
}

TEST_CASE("explicit noise fields reproduce the seeded run") {
    const auto g = build_grid(CompactUnit{}, 16, 0.02, 512);
    const auto m = noisy_model();
    const auto a = run_relative_frame(sine(g), sine(g), 0.0, m, g, 3, RunOptions{1});
    const auto b = run_relative_frame(sine(g), sine(g), 0.0, m, sample_white_noise(g, 3, kStreamBid),
                                      sample_white_noise(g, 3, kStreamAsk), RunOptions{1});
    CHECK(a.v1 == b.v1);
    CHECK(a.p == b.p);
}

TEST_CASE("step_reflected matches the stepper and checks its inputs") {
    const auto g = build_grid(CompactUnit{}, 16, 0.02, 512);
    const auto m = noisy_model();
    const auto s0 = initial_state(sine(g), sine(g, 0.3), 0.0, m, g);
    const auto xi1 = sample_white_noise(g, 1, kStreamBid).row(0);
    const auto xi2 = sample_white_noise(g, 1, kStreamAsk).row(0);
    auto s1 = s0;
    Stepper(m, g).step(s1, xi1, xi2);
    const auto s2 = step_reflected(s0, m, xi1, xi2, g);
    CHECK(s1.v1 == s2.v1);
    CHECK(s1.p == s2.p);
    CHECK(s2.p == doctest::Approx(boundary::advance_p(s0.p, s0.p_prime, g.dt())));
    CHECK_THROWS_AS(step_reflected(s0, m, Eigen::VectorXd::Zero(4), xi2, g), Error);

    auto blown = s0;
    blown.blown_up = true;
    try {
        step_reflected(blown, m, xi1, xi2, g);
        FAIL("expected AlreadyBlownUp");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AlreadyBlownUp);
    }
}

TEST_CASE("invalid initial data and truncation levels") {
    const auto g = build_grid(CompactUnit{}, 16, 0.02, 512);
    Eigen::VectorXd neg = sine(g);
    neg[3] = -0.1;
    CHECK_THROWS_AS(initial_state(neg, zeros(g), 0.0, Model{}, g), Error);
    Eigen::VectorXd edge = sine(g);
    edge[16] = 0.5;
    CHECK_THROWS_AS(initial_state(edge, zeros(g), 0.0, Model{}, g), Error);
    CHECK_THROWS_AS(initial_state(Eigen::VectorXd::Zero(5), zeros(g), 0.0, Model{}, g), Error);

    auto bad = noisy_model(8.0, 4.0);
    try {
        validate(bad);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
    auto mismatch = noisy_model(2.0, 10.0);
    mismatch.boundary.truncation_M = 3.0;
    CHECK_THROWS_AS(validate(mismatch), Error);
}

TEST_CASE("truncation levels agree until the norm reaches the smaller one") {
    const auto g = build_grid(CompactUnit{}, 32, 0.1, 4096);
    auto low_model = noisy_model(2.0);
    auto high_model = noisy_model(8.0);
    low_model.coeffs.f1 = high_model.coeffs.f1 = ConstantCoef{30.0};
    low_model.coeffs.f2 = high_model.coeffs.f2 = ConstantCoef{20.0};
    const auto low = run_relative_frame(sine(g, 0.5), sine(g, 0.5), 0.0, low_model, g, 21, RunOptions{1});
    const auto high = run_relative_frame(sine(g, 0.5), sine(g, 0.5), 0.0, high_model, g, 21, RunOptions{1});
    std::size_t first = low.t.size();
    for (std::size_t k = 0; k < low.t.size(); ++k) {
        if (low.norm1[k] + low.norm2[k] >= 2.0) {
            first = k;
            break;
        }
    }
    REQUIRE(first < low.t.size());  // the test must actually reach the cap
    for (std::size_t k = 0; k <= first; ++k) {
        CHECK(low.p[k] == high.p[k]);
        CHECK(low.v1.row(static_cast<Eigen::Index>(k)) == high.v1.row(static_cast<Eigen::Index>(k)));
        CHECK(low.v2.row(static_cast<Eigen::Index>(k)) == high.v2.row(static_cast<Eigen::Index>(k)));
    }
    // the cap does act later on
    CHECK(low.v1.bottomRows(1) != high.v1.bottomRows(1));
}

TEST_CASE("blow-up time is monotone in the threshold") {
    const auto g = build_grid(CompactUnit{}, 16, 1.0, 2048);
    auto model = [](double M_max) {
        Model m;
        m.coeffs.f1 = AffineCoef{1.0, 20.0};
        m.coeffs.f2 = AffineCoef{1.0, 20.0};
        m.M_max = M_max;
        return m;
    };
    const auto a = run_relative_frame(sine(g), sine(g), 0.0, model(10.0), g, 4);
    const auto b = run_relative_frame(sine(g), sine(g), 0.0, model(100.0), g, 4);
    REQUIRE(a.blown_up());
    REQUIRE(b.blown_up());
    CHECK(*a.final_state.tau_estimate <= *b.final_state.tau_estimate);
    CHECK(a.steps() < static_cast<std::size_t>(g.nt()));
    CHECK(std::isfinite(a.final_state.v1.maxCoeff()));
    Stepper stepper(model(10.0), g);
    auto s = a.final_state;
    CHECK_THROWS_AS(stepper.step(s, zeros(g), zeros(g)), Error);
}

TEST_CASE("bounded speed on the half-line runs to the horizon") {
    const auto g = build_grid(HalfLine{4.0, 0.5}, 64, 0.1, 4096);
    Model m;
    m.coeffs.sigma1 = ExpDecayCoef{0.5, 0.0, 1.0};
    m.coeffs.sigma2 = ExpDecayCoef{0.5, 0.0, 1.0};
    m.boundary.kind = boundary::ExpImbalance{5.0, 100.0};
    m.boundary.clamp = 2.0;
    m.boundary.weight_r = 0.5;
    const auto traj = run_relative_frame(sine(g), sine(g, 0.5), 0.0, m, g, 17);
    CHECK_FALSE(traj.blown_up());
    CHECK(traj.steps() == 4096u);
    CHECK(traj.final_state.v1.minCoeff() >= 0.0);
    for (double pp : traj.p_prime) {
        CHECK(std::abs(pp) <= 2.0);
    }
}

TEST_CASE("weighted norm") {
    const auto g = build_grid(HalfLine{4.0, 1.0}, 400, 0.01, 200000);
    CHECK(weighted_norm(zeros(g), g, 1.0) == 0.0);
    const Eigen::VectorXd ex = g.nodes().array().exp().matrix();
    CHECK(weighted_norm(ex, g, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(weighted_norm(g.nodes(), g, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("relative and absolute coordinates") {
    CHECK(to_absolute(100.0, 0.5, Side::Bid) == 99.5);
    CHECK(to_absolute(100.0, 0.5, Side::Ask) == 100.5);
    CHECK(to_relative(100.0, 99.5, Side::Bid) == 0.5);
    CHECK(to_relative(100.0, 100.5, Side::Ask) == 0.5);
}

TEST_CASE("trajectory csv layout") {
    const auto g = build_grid(CompactUnit{}, 8, 0.01, 200);
    const auto traj = run_relative_frame(sine(g), zeros(g), 0.0, noisy_model(), g, 1, RunOptions{100});
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    CHECK(out.str().rfind("step,t,p,p_prime,norm1,norm2\n", 0) == 0);
    std::ostringstream prof;
    write_profiles_csv(prof, traj);
    CHECK(prof.str().rfind("t,x,v1,v2\n", 0) == 0);
    CHECK(traj.profile_t.size() == 3u);
}

}
