// Command-line front end: one subcommand per experiment, all driven by a YAML config.

#include "rsmb/config.hpp"
#include "rsmb/errors.hpp"
#include "rsmb/heat_kernel.hpp"
#include "rsmb/lob.hpp"
#include "rsmb/obstacle.hpp"
#include "rsmb/picard.hpp"
#include "rsmb/regularity.hpp"
#include "rsmb/spde.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <yaml-cpp/exceptions.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::vector<std::string> overrides;
};

rsmb::config::Config load(const CommonArgs& args) {
    return rsmb::config::load(args.config_path, args.overrides, args.seed, args.out);
}

fs::path output_file(const rsmb::config::Config& cfg, const std::string& name) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir / name;
}

std::ofstream open_csv(const rsmb::config::Config& cfg, const std::string& name) {
    const fs::path path = output_file(cfg, name);
    std::ofstream out(path);
    if (!out) {
        throw rsmb::Error(rsmb::ErrorKind::ConfigError, "cannot write " + path.string());
    }
    out << rsmb::config::header_line(cfg) << '\n';
    return out;
}

void write_json(const rsmb::config::Config& cfg, const std::string& name, json j) {
    j["schema"] = 1;
    j["config_hash"] = rsmb::config::hash_hex(cfg.hash);
    j["seed"] = cfg.seed;
    const fs::path path = output_file(cfg, name);
    std::ofstream out(path);
    if (!out) {
        throw rsmb::Error(rsmb::ErrorKind::ConfigError, "cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

std::ifstream open_input(const std::string& path, const char* field) {
    if (path.empty()) {
        throw rsmb::Error(rsmb::ErrorKind::ConfigError, std::string("missing required field ") + field);
    }
    std::ifstream in(path);
    if (!in) {
        throw rsmb::Error(rsmb::ErrorKind::ConfigError, std::string(field) + ": cannot open " + path);
    }
    return in;
}

int run_simulate(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto grid = cfg.grid.build();
    const auto traj = rsmb::spde::run_relative_frame(cfg.initial1.sample(grid), cfg.initial2.sample(grid),
                                                     cfg.p0, cfg.model, grid, cfg.seed,
                                                     rsmb::spde::RunOptions{cfg.stride});
    {
        auto out = open_csv(cfg, "trajectory.csv");
        rsmb::spde::write_trajectory_csv(out, traj);
    }
    if (cfg.stride > 0) {
        auto out = open_csv(cfg, "profiles.csv");
        rsmb::spde::write_profiles_csv(out, traj);
    }
    const auto& s = traj.final_state;
    json summary{{"blown_up", s.blown_up},
                 {"tau_estimate", s.tau_estimate ? json(*s.tau_estimate) : json(nullptr)},
                 {"steps", traj.steps()},
                 {"t_final", s.time},
                 {"p_final", s.p},
                 {"p_prime_final", s.p_prime}};
    write_json(cfg, "summary.json", summary);
    std::cout << "simulate: steps=" << traj.steps() << " blown_up=" << (s.blown_up ? "true" : "false")
              << " p_final=" << s.p << '\n';
    return 0;
}

int run_obstacle(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto grid = cfg.grid.build();
    const rsmb::Field v = cfg.obstacle.sample(grid);
    const auto sol = cfg.obstacle.method == "penalized"
                         ? rsmb::obstacle::solve_penalized(v, cfg.obstacle.epsilon)
                         : rsmb::obstacle::solve_projected(v);
    {
        auto out = open_csv(cfg, "obstacle.csv");
        rsmb::obstacle::write_csv(out, sol, v);
    }
    const double min_gap = (sol.z.values - v.values).minCoeff();
    const double mass = sol.eta.sum();
    write_json(cfg, "obstacle.json",
               json{{"method", cfg.obstacle.method},
                    {"min_gap", min_gap},
                    {"eta_mass", mass},
                    {"complementarity", rsmb::obstacle::complementarity(sol, v)}});
    std::cout << "obstacle: method=" << cfg.obstacle.method << " min(z - v)=" << min_gap
              << " eta_mass=" << mass << '\n';
    return 0;
}

int run_picard(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto grid = cfg.grid.build();
    const auto xi1 = rsmb::sample_white_noise(grid, cfg.seed, rsmb::kStreamBid);
    const auto xi2 = rsmb::sample_white_noise(grid, cfg.seed, rsmb::kStreamAsk);
    const auto v1 = cfg.initial1.sample(grid);
    const auto v2 = cfg.initial2.sample(grid);
    auto report = rsmb::picard::picard_iterate(v1, v2, cfg.model, xi1, xi2, cfg.picard.iterations,
                                               cfg.picard.tolerance);
    if (cfg.picard.compare_direct) {
        rsmb::picard::gap_vs_direct(report, v1, v2, cfg.model, xi1, xi2);
    }
    json j = report;
    write_json(cfg, "picard.json", j);
    std::cout << "picard-check: iters=" << report.iters << " d_last=" << report.d.back()
              << " converged=" << (report.converged ? "true" : "false") << '\n';
    return 0;
}

struct PathStats {
    rsmb::regularity::StructureFunction time;
    rsmb::regularity::StructureFunction space;
    std::optional<rsmb::regularity::StructureFunction> boundary;
};

int run_holder(const CommonArgs& args) {
    using namespace rsmb::regularity;
    const auto cfg = load(args);
    const auto grid = cfg.grid.build();
    const auto& hc = cfg.holder;
    const auto time_lags = dyadic_lags(hc.time_lags[0], hc.time_lags[1]);
    const auto space_lags = dyadic_lags(hc.space_lags[0], hc.space_lags[1]);
    const auto boundary_lags = dyadic_lags(hc.boundary_lags[0], hc.boundary_lags[1]);
    const bool with_boundary = !std::holds_alternative<rsmb::boundary::Zero>(cfg.model.boundary.kind);
    const Window window{hc.margin, true};
    const auto v1 = cfg.initial1.sample(grid);
    const auto v2 = cfg.initial2.sample(grid);

    std::vector<std::optional<PathStats>> stats(static_cast<std::size_t>(hc.paths));
    std::vector<std::string> errors(static_cast<std::size_t>(hc.paths));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < hc.paths; k = next++) {
            const auto uk = static_cast<std::size_t>(k);
            try {
                const auto traj = rsmb::spde::run_relative_frame(
                    v1, v2, cfg.p0, cfg.model, grid, cfg.seed + static_cast<std::uint64_t>(k),
                    rsmb::spde::RunOptions{1});
                PathStats ps{structure_function(traj.v1, Axis::Time, time_lags, hc.q, window),
                             structure_function(traj.v1, Axis::Space, space_lags, hc.q, window),
                             std::nullopt};
                if (with_boundary) {
                    const auto n = static_cast<Eigen::Index>(traj.p_prime.size());
                    const Eigen::Map<const Eigen::VectorXd> pp(traj.p_prime.data(), n);
                    const Eigen::Index skip = static_cast<Eigen::Index>(std::ceil(hc.margin * n));
                    ps.boundary = structure_function(pp.tail(n - skip), boundary_lags, hc.q);
                }
                stats[uk] = std::move(ps);
            } catch (const std::exception& e) {
                errors[uk] = e.what();
            }
        }
    };
    std::vector<std::thread> workers;
    for (int t = 1; t < hc.threads; ++t) {
        workers.emplace_back(worker);
    }
    worker();
    for (auto& t : workers) {
        t.join();
    }
    std::vector<StructureFunction> time_sf;
    std::vector<StructureFunction> space_sf;
    std::vector<StructureFunction> boundary_sf;
    for (std::size_t k = 0; k < stats.size(); ++k) {
        if (!stats[k]) {
            throw rsmb::Error(rsmb::ErrorKind::NumericalInstability,
                              "path " + std::to_string(k) + " failed: " + errors[k]);
        }
        time_sf.push_back(stats[k]->time);
        space_sf.push_back(stats[k]->space);
        if (stats[k]->boundary) {
            boundary_sf.push_back(*stats[k]->boundary);
        }
    }
    json rows = json::array();
    const auto t_est = fit_holder(pool(time_sf), Axis::Time, hc.paths);
    const auto s_est = fit_holder(pool(space_sf), Axis::Space, hc.paths);
    rows.push_back(t_est);
    rows.push_back(s_est);
    std::cout << "holder: time=" << t_est.exponent << " space=" << s_est.exponent;
    if (!boundary_sf.empty()) {
        json b = fit_holder(pool(boundary_sf), Axis::Time, hc.paths);
        b["series"] = "p_prime";
        std::cout << " p_prime=" << b["exponent"].get<double>();
        rows.push_back(b);
    }
    std::cout << '\n';
    write_json(cfg, "holder.json", json{{"rows", rows}});
    return 0;
}

int run_kernel_check(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto& kc = cfg.kernel_check;
    const auto t_values = rsmb::log_spaced(kc.t_min, kc.t_max, kc.count);
    const auto half = rsmb::verify_kernel_bounds(t_values, kc.x_samples, kc.r);
    std::vector<double> compact_x{0.1, 0.25, 0.5};
    const auto compact = rsmb::verify_compact_derivative_bound(
        t_values, compact_x, rsmb::kernel::default_images(kc.t_max));
    write_json(cfg, "kernel.json", json{{"reports", {half, compact}}});
    std::cout << "kernel-check: " << half.estimate_name << " scaled_sup=" << half.scaled_sup
              << " growth=" << (half.growth_flag ? "true" : "false") << '\n';
    return 0;
}

rsmb::lob::FitResult fit_from_config(const rsmb::config::Config& cfg) {
    const auto& lc = cfg.lob;
    rsmb::lob::ParseOptions opts;
    opts.max_malformed = lc.max_malformed;
    opts.price_window = lc.price_window;
    auto in = open_input(lc.input, "lob.input");
    rsmb::lob::EventStream stream;
    if (lc.format == "lobster") {
        opts.format = rsmb::lob::Format::LobsterMessage;
        rsmb::lob::TouchSeries touch;
        if (!lc.touch.empty()) {
            auto t = open_input(lc.touch, "lob.touch");
            touch = rsmb::lob::read_touch_csv(t);
        } else {
            auto book = open_input(lc.orderbook, "lob.orderbook");
            auto msg = open_input(lc.input, "lob.input");
            touch = rsmb::lob::touch_from_lobster(book, msg);
        }
        stream = rsmb::lob::parse_events(in, opts, &touch);
    } else {
        stream = rsmb::lob::parse_events(in, opts);
    }
    std::cout << "fit-lob: events=" << stream.events.size() << " malformed=" << stream.malformed
              << " filtered=" << stream.filtered << '\n';
    return rsmb::lob::fit_coefficients(stream, lc.n_bins, lc.pool_sides,
                                       rsmb::lob::FitOptions{lc.interval, 1});
}

int run_fit_lob(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto fit = fit_from_config(cfg);
    auto out = open_csv(cfg, "fit.csv");
    rsmb::lob::write_fit_csv(out, fit);
    return 0;
}

int run_simulate_price(const CommonArgs& args) {
    const auto cfg = load(args);
    rsmb::lob::FitResult fit;
    if (!cfg.lob.fit.empty()) {
        auto in = open_input(cfg.lob.fit, "lob.fit");
        fit = rsmb::lob::read_fit_csv(in);
    } else {
        fit = fit_from_config(cfg);
    }
    const auto grid = cfg.grid.build();
    rsmb::lob::PriceOptions opts;
    opts.lap_scale = cfg.lob.lap_scale;
    opts.p0 = cfg.p0;
    const auto series = rsmb::lob::simulate_price(fit, cfg.model.boundary, grid, cfg.seed, opts);
    auto out = open_csv(cfg, "price.csv");
    rsmb::lob::write_price_csv(out, series);
    std::cout << "simulate-price: steps=" << series.t.size() - 1 << " p_final=" << series.p.back()
              << " blown_up=" << (series.blown_up ? "true" : "false") << '\n';
    return 0;
}

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("-c,--config", args.config_path, "YAML config file")->required();
    sub->add_option("--seed", args.seed, "override noise.seed");
    sub->add_option("--out", args.out, "override output.dir");
    sub->add_option("--set", args.overrides, "override a config field, key.path=value");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected stochastic heat equations with a moving boundary"};
    app.require_subcommand(1);
    CommonArgs args;
    using Runner = int (*)(const CommonArgs&);
    const std::vector<std::tuple<const char*, const char*, Runner>> commands{
        {"simulate", "forward Euler run of the coupled system", run_simulate},
        {"obstacle", "single obstacle problem solve", run_obstacle},
        {"picard-check", "Picard iteration and comparison with the direct scheme", run_picard},
        {"holder", "Hoelder exponent ensemble", run_holder},
        {"kernel-check", "heat kernel estimate report", run_kernel_check},
        {"fit-lob", "fit drift and volatility tables from order book events", run_fit_lob},
        {"simulate-price", "price path from fitted coefficients", run_simulate_price},
    };
    std::vector<std::pair<CLI::App*, Runner>> subs;
    for (const auto& [name, help, runner] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, args);
        subs.emplace_back(sub, runner);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        for (const auto& [sub, runner] : subs) {
            if (sub->parsed()) {
                return runner(args);
            }
        }
    } catch (const rsmb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_validation() ? 1 : 2;
    } catch (const YAML::Exception& e) {
        std::cerr << "error: ConfigError: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
