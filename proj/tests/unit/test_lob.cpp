#include "rsmb/lob.hpp"
#include "rsmb/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rsmb;
using namespace rsmb::lob;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::ConfigError;
}

EventStream parse(const std::string& text, ParseOptions opts = {}, const TouchSeries* touch = nullptr) {
    std::istringstream in(text);
    return parse_events(in, opts, touch);
}

SyntheticSpec uniform_spec(int n_bins, double f, double sigma, double horizon, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.horizon = horizon;
    spec.seed = seed;
    const double width = 1.0 / n_bins;
    for (int k = 0; k < n_bins; ++k) {
        spec.bid.push_back(rates_for(f, sigma, 1.0, width));
        spec.ask.push_back(rates_for(f, sigma, 1.0, width));
    }
    return spec;
}

}  // namespace

TEST_SUITE("lob") {

TEST_CASE("normalized parsing") {
    const auto empty = parse("");
    CHECK(empty.events.empty());
    CHECK(empty.malformed == 0);

    const auto one = parse("0.5,bid,limit,0.03,100\n");
    REQUIRE(one.events.size() == 1);
    CHECK(one.events[0].time == 0.5);
    CHECK(one.events[0].side == BookSide::Bid);
    CHECK(one.events[0].type == EventType::Limit);
    CHECK(one.events[0].relative_price == 0.03);
    CHECK(one.events[0].size == 100.0);

    const auto with_header = parse("time,side,event_type,relative_price,size\n1,ask,cancel,0.2,5\n2,ask,market,0,5\n");
    CHECK(with_header.events.size() == 2);
    CHECK(with_header.events[1].type == EventType::Market);
    CHECK(with_header.horizon() == 1.0);

    const auto window = parse("1,bid,limit,1.5,1\n2,bid,limit,0.5,1\n");
    CHECK(window.events.size() == 1);
    CHECK(window.filtered == 1);
}

TEST_CASE("malformed rows and time order") {
    const std::string bad = "1,bid,limit,0.1,1\n2,sideways,limit,0.1,1\n3,bid,limit,abc,1\n4,bid,limit,0.1,1\n";
    CHECK(kind_of([&] { parse(bad); }) == ErrorKind::FormatError);
    ParseOptions lenient;
    lenient.max_malformed = 2;
    const auto s = parse(bad, lenient);
    CHECK(s.malformed == 2);
    CHECK(s.events.size() == 2);
    CHECK(kind_of([] { parse("2,bid,limit,0.1,1\n1,bid,limit,0.1,1\n"); }) == ErrorKind::NonMonotoneTime);
}

TEST_CASE("LOBSTER message mapping") {
    // touch: bid 100.00 / ask 100.05 until t=10, then 100.10 / 100.15
    TouchSeries touch{{0.0, 10.0}, {100.00, 100.10}, {100.05, 100.15}};
    const std::string msgs =
        "1.0,1,11,100,999500,1\n"    // new limit bid at 99.95
        "2.0,2,11,50,999500,1\n"     // partial cancel
        "3.0,3,12,20,1001000,-1\n"   // delete ask at 100.10
        "4.0,4,13,10,1000500,-1\n"   // visible execution against the ask
        "5.0,5,14,10,1000000,1\n"    // hidden execution
        "6.0,6,0,0,0,0\n"            // cross trade: skipped
        "10.0,1,15,5,1000500,1\n"    // bid at 100.05 priced against the old touch
        "11.0,1,16,5,1000500,1\n";   // the new touch applies strictly after t = 10
    ParseOptions opts;
    opts.format = Format::LobsterMessage;
    const auto s = parse(msgs, opts, &touch);
    REQUIRE(s.events.size() == 7);
    CHECK(s.skipped == 1);
    CHECK(s.events[0].type == EventType::Limit);
    CHECK(s.events[0].side == BookSide::Bid);
    CHECK(s.events[0].relative_price == doctest::Approx(0.05));
    CHECK(s.events[1].type == EventType::Cancel);
    CHECK(s.events[2].type == EventType::Cancel);
    CHECK(s.events[2].side == BookSide::Ask);
    CHECK(s.events[2].relative_price == doctest::Approx(0.05));
    CHECK(s.events[3].type == EventType::Market);
    CHECK(s.events[4].type == EventType::Market);
    CHECK(s.events[5].relative_price == 0.0);  // inside the old spread, clamped at the touch
    CHECK(s.events[6].relative_price == doctest::Approx(0.05));

    CHECK(kind_of([&] { parse(msgs, opts, nullptr); }) == ErrorKind::ConfigError);
}

TEST_CASE("touch series from a LOBSTER order book") {
    std::istringstream book("1000500,10,1000000,20\n1000600,5,1000100,7\n");
    std::istringstream msg("1.0,1,1,10,1000500,-1\n2.0,1,2,7,1000100,1\n");
    const auto touch = touch_from_lobster(book, msg);
    REQUIRE(touch.time.size() == 2);
    CHECK(touch.best_ask[0] == doctest::Approx(100.05));
    CHECK(touch.best_bid[1] == doctest::Approx(100.01));
    CHECK(touch.index_before(1.5) == 0);
    CHECK(touch.index_before(2.0) == 0);
    CHECK(touch.index_before(2.5) == 1);
    CHECK(touch.index_before(0.1) == 0);

    std::istringstream csv("time,best_bid,best_ask\n0,99.9,100.1\n5,99.8,100.0\n");
    const auto t2 = read_touch_csv(csv);
    CHECK(t2.best_bid[1] == 99.8);
}

TEST_CASE("constant limit arrivals give the Poisson drift") {
    SyntheticSpec spec;
    spec.horizon = 500.0;
    spec.seed = 3;
    const int n_bins = 4;
    const double mu = 4.0;
    spec.bid.assign(n_bins, BinRates{});
    spec.ask.assign(n_bins, BinRates{});
    spec.bid[1].limit = mu;
    const auto stream = generate_stream(spec);
    CHECK(stream.events.size() >= 1000);
    const auto fit = fit_coefficients(stream, n_bins, false);
    const double width = 1.0 / n_bins;
    CHECK(fit.bid[1].f == doctest::Approx(mu / width).epsilon(0.15));
    CHECK(fit.bid[0].insufficient);
    CHECK(fit.bid[0].f == 0.0);
    CHECK(fit.bid[0].sigma == 0.0);
}

TEST_CASE("balanced limit and cancel flow has zero drift") {
    SyntheticSpec spec;
    spec.horizon = 400.0;
    spec.seed = 8;
    spec.bid.assign(4, BinRates{5.0, 5.0, 0.0});
    spec.ask.assign(4, BinRates{5.0, 5.0, 0.0});
    const auto fit = fit_coefficients(generate_stream(spec), 4, false);
    for (const auto& b : fit.bid) {
        const double se = std::sqrt(10.0 / 0.25 / 400.0) * 4;  // four standard errors of f
        CHECK(std::abs(b.f) <= se);
        CHECK(b.sigma > 0.0);
    }
}

TEST_CASE("round trip recovers drift and volatility") {
    const int n_bins = 5;
    const double width = 1.0 / n_bins;
    SyntheticSpec spec;
    // relative accuracy needs |f| well above the standard error sigma / sqrt(H width)
    spec.horizon = 5000.0;
    spec.seed = 42;
    std::vector<double> f_true;
    std::vector<double> s_true;
    for (int k = 0; k < n_bins; ++k) {
        f_true.push_back(20.0 - 3.0 * k);
        s_true.push_back(8.0 + k);
        spec.bid.push_back(rates_for(f_true.back(), s_true.back(), 1.0, width));
        spec.ask.push_back(rates_for(f_true.back(), s_true.back(), 1.0, width));
    }
    const auto fit = fit_coefficients(generate_stream(spec), n_bins, false);
    for (int k = 0; k < n_bins; ++k) {
        for (const auto* side : {&fit.bid, &fit.ask}) {
            const auto& b = (*side)[static_cast<std::size_t>(k)];
            if (b.count < 1000) {
                continue;
            }
            CHECK(b.x_center == doctest::Approx((k + 0.5) * width));
            CHECK(std::abs(b.f - f_true[static_cast<std::size_t>(k)]) <= 0.15 * std::abs(f_true[static_cast<std::size_t>(k)]) + 1e-12);
            CHECK(std::abs(b.sigma - s_true[static_cast<std::size_t>(k)]) <= 0.25 * s_true[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("pooled fit averages the sides") {
    const auto stream = generate_stream(uniform_spec(4, 6.0, 7.0, 300.0, 5));
    const auto sides = fit_coefficients(stream, 4, false);
    const auto pooled = fit_coefficients(stream, 4, true);
    CHECK(pooled.symmetric);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(pooled.bid[k].f == doctest::Approx(0.5 * (sides.bid[k].f + sides.ask[k].f)).epsilon(1e-9));
        const double var = 0.5 * (sides.bid[k].sigma * sides.bid[k].sigma + sides.ask[k].sigma * sides.ask[k].sigma);
        CHECK(pooled.bid[k].sigma * pooled.bid[k].sigma == doctest::Approx(var).epsilon(1e-9));
        CHECK(pooled.ask[k].f == pooled.bid[k].f);
    }
}

TEST_CASE("fit argument checks") {
    const auto stream = generate_stream(uniform_spec(4, 6.0, 7.0, 50.0, 5));
    CHECK(kind_of([&] { fit_coefficients(stream, 3, true); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { fit_coefficients(EventStream{}, 4, true); }) == ErrorKind::InsufficientData);
    CHECK(kind_of([] { rates_for(10.0, 1.0, 1.0, 0.1); }) == ErrorKind::ConfigError);
}

TEST_CASE("rates reproduce the target moments") {
    const auto r = rates_for(5.0, 6.0, 2.0, 0.25);
    CHECK((r.limit - r.cancel) * 2.0 / 0.25 == doctest::Approx(5.0));
    CHECK((r.limit + r.cancel) * 4.0 / 0.25 == doctest::Approx(36.0));
}

TEST_CASE("fit csv round trip") {
    const auto fit = fit_coefficients(generate_stream(uniform_spec(4, 6.0, 7.0, 100.0, 5)), 4, true);
    std::stringstream io;
    write_fit_csv(io, fit);
    CHECK(io.str().rfind("x_center,f,sigma,count\n", 0) == 0);
    const auto back = read_fit_csv(io);
    REQUIRE(back.bid.size() == 4);
    CHECK(back.bid[2].f == fit.bid[2].f);
    CHECK(back.ask[2].sigma == fit.ask[2].sigma);

    const auto sided = fit_coefficients(generate_stream(uniform_spec(4, 6.0, 7.0, 100.0, 5)), 4, false);
    std::stringstream io2;
    write_fit_csv(io2, sided);
    CHECK(io2.str().rfind("side,x_center,f,sigma,count\n", 0) == 0);
    const auto back2 = read_fit_csv(io2);
    CHECK(back2.ask[1].f == sided.ask[1].f);
}

TEST_CASE("events csv round trip") {
    const auto stream = generate_stream(uniform_spec(4, 6.0, 7.0, 10.0, 5));
    std::stringstream io;
    write_events_csv(io, stream);
    const auto back = parse_events(io, ParseOptions{});
    REQUIRE(back.events.size() == stream.events.size());
    CHECK(back.events[7].time == stream.events[7].time);
    CHECK(back.events[7].relative_price == stream.events[7].relative_price);
}

TEST_CASE("price simulation") {
    const auto g = build_grid(CompactUnit{}, 32, 0.1, 2048);
    boundary::BoundaryFunctional h{boundary::ExpImbalance{5.0, 100.0}, 5.0, {}, 0.0};

    FitResult flat;
    flat.symmetric = true;
    for (int k = 0; k < 4; ++k) {
        flat.bid.push_back(Bin{(k + 0.5) / 4, 0.0, 0.0, 0, false});
    }
    flat.ask = flat.bid;
    PriceOptions opts;
    opts.p0 = 100.0;
    const auto still = simulate_price(flat, h, g, 1, opts);
    for (double p : still.p) {
        CHECK(p == 100.0);
    }

    const auto fit = fit_coefficients(generate_stream(uniform_spec(4, 6.0, 7.0, 200.0, 5)), 4, true);
    const auto a = simulate_price(fit, h, g, 9, opts);
    const auto b = simulate_price(fit, h, g, 9, opts);
    std::ostringstream sa;
    std::ostringstream sb;
    write_price_csv(sa, a);
    write_price_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("t,p\n", 0) == 0);
    CHECK(a.p.size() == static_cast<std::size_t>(g.n_times()));
    CHECK(a.p.back() != 100.0);
    CHECK_FALSE(a.blown_up);

    // the same constant coefficient tables on 4 and 8 bins
    auto constant_fit = [](int n) {
        FitResult r;
        r.symmetric = true;
        for (int k = 0; k < n; ++k) {
            r.bid.push_back(Bin{(k + 0.5) / n, 3.0, 2.0, 100, false});
        }
        r.ask = r.bid;
        return r;
    };
    const auto c4 = simulate_price(constant_fit(4), h, g, 2, opts);
    const auto c8 = simulate_price(constant_fit(8), h, g, 2, opts);
    CHECK(c4.p == c8.p);

    const auto half = build_grid(HalfLine{2.0, 0.0}, 32, 0.1, 8192);
    CHECK_THROWS_AS(simulate_price(fit, h, half, 1, opts), Error);
}

}
