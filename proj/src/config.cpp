#include "rsmb/config.hpp"

#include "rsmb/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rsmb::config {

namespace {

std::string where(const YAML::Node& node) {
    const auto mark = node.Mark();
    if (mark.line < 0) {
        return "";
    }
    return " (line " + std::to_string(mark.line + 1) + ")";
}

template <typename T>
T convert(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw Error(ErrorKind::ConfigError, "field " + field + " has an invalid value" + where(node));
    }
}

/// Value at section.key, or the fallback when absent.
template <typename T>
T get(const YAML::Node& section, const std::string& path, const char* key, T fallback) {
    if (!section || !section.IsMap() || !section[key]) {
        return fallback;
    }
    return convert<T>(section[key], path + "." + key);
}

template <typename T>
T require(const YAML::Node& section, const std::string& path, const char* key) {
    if (!section || !section.IsMap() || !section[key]) {
        throw Error(ErrorKind::ConfigError, "missing required field " + path + "." + key);
    }
    return convert<T>(section[key], path + "." + key);
}

double get_level(const YAML::Node& section, const std::string& path, const char* key) {
    return get<double>(section, path, key, std::numeric_limits<double>::infinity());
}

Coefficient parse_coefficient(const YAML::Node& node, const std::string& path) {
    if (!node) {
        return ConstantCoef{};
    }
    if (node.IsScalar()) {
        return ConstantCoef{convert<double>(node, path)};
    }
    const auto kind = get<std::string>(node, path, "kind", "constant");
    if (kind == "constant") {
        return ConstantCoef{get<double>(node, path, "c", 0.0)};
    }
    if (kind == "affine") {
        return AffineCoef{get<double>(node, path, "a", 0.0), get<double>(node, path, "b", 0.0)};
    }
    if (kind == "exp_decay") {
        return ExpDecayCoef{get<double>(node, path, "a", 0.0), get<double>(node, path, "b", 0.0),
                            get<double>(node, path, "delta", 0.0)};
    }
    if (kind == "sine") {
        return SineCoef{get<double>(node, path, "a", 0.0), get<double>(node, path, "b", 0.0)};
    }
    if (kind == "table") {
        TableCoef table{require<std::vector<double>>(node, path, "centers"),
                        require<std::vector<double>>(node, path, "values")};
        if (table.centers.empty() || table.centers.size() != table.values.size() ||
            !std::is_sorted(table.centers.begin(), table.centers.end())) {
            throw Error(ErrorKind::ConfigError,
                        "field " + path + " needs sorted centers and matching values" + where(node));
        }
        return table;
    }
    throw Error(ErrorKind::ConfigError, "field " + path + ".kind: unknown coefficient kind '" + kind +
                                            "'" + where(node["kind"]));
}

boundary::BoundaryFunctional parse_boundary(const YAML::Node& node) {
    const std::string path = "boundary";
    boundary::BoundaryFunctional fn;
    const auto kind = get<std::string>(node, path, "kind", "zero");
    if (kind == "exp_imbalance") {
        fn.kind = boundary::ExpImbalance{get<double>(node, path, "alpha", 5.0),
                                         get<double>(node, path, "lambda", 100.0)};
    } else if (kind == "stefan_fd") {
        fn.kind = boundary::StefanFd{get<bool>(node, path, "second_order", false)};
    } else if (kind == "zero") {
        fn.kind = boundary::Zero{};
    } else if (kind == "table") {
        fn.kind = boundary::Table{get<double>(node, path, "lambda", 100.0),
                                  require<std::vector<double>>(node, path, "imbalance"),
                                  require<std::vector<double>>(node, path, "speed")};
    } else {
        throw Error(ErrorKind::ConfigError, "field boundary.kind: unknown kind '" + kind + "'");
    }
    if (node && node["clamp"]) {
        fn.clamp = convert<double>(node["clamp"], "boundary.clamp");
    }
    if (node && node["truncation_M"]) {
        fn.truncation_M = convert<double>(node["truncation_M"], "boundary.truncation_M");
    }
    return fn;
}

InitialProfile parse_initial(const YAML::Node& node, const std::string& path) {
    InitialProfile init;
    init.kind = get<std::string>(node, path, "kind", "zero");
    init.amplitude = get<double>(node, path, "amplitude", 1.0);
    if (init.kind != "zero" && init.kind != "sine") {
        throw Error(ErrorKind::ConfigError, "field " + path + ".kind must be zero or sine");
    }
    if (init.amplitude < 0.0) {
        throw Error(ErrorKind::ConfigError, "field " + path + ".amplitude must be >= 0");
    }
    return init;
}

std::vector<int> lag_pair(const YAML::Node& section, const std::string& path, const char* key,
                          std::vector<int> fallback) {
    auto lags = get<std::vector<int>>(section, path, key, std::move(fallback));
    if (lags.size() != 2 || lags[0] < 1 || lags[1] < lags[0]) {
        throw Error(ErrorKind::ConfigError, "field " + path + "." + key + " must be [min_lag, max_lag]");
    }
    return lags;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorKind::ConfigError, "override '" + assignment + "' is not key.path=value");
    }
    const std::string key = assignment.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(assignment.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::ConfigError, "override '" + assignment + "': " + e.what());
    }
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) {
            throw Error(ErrorKind::ConfigError, "override key '" + key + "' has an empty component");
        }
        parts.push_back(part);
    }
    YAML::Node cur = root;
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        if (!cur[parts[k]] || !cur[parts[k]].IsMap()) {
            cur[parts[k]] = YAML::Node(YAML::NodeType::Map);
        }
        YAML::Node next = cur[parts[k]];
        cur.reset(next);
    }
    cur[parts.back()] = value;
}

Config build(YAML::Node root) {
    if (!root.IsMap()) {
        throw Error(ErrorKind::ConfigError, "config must be a mapping with sections grid, model, ...");
    }
    Config cfg;
    const YAML::Node grid = root["grid"];
    if (!grid) {
        throw Error(ErrorKind::ConfigError, "missing required section grid");
    }
    cfg.grid.nx = require<int>(grid, "grid", "nx");
    cfg.grid.nt = require<int>(grid, "grid", "nt");
    cfg.grid.T = require<double>(grid, "grid", "T");
    const auto domain = get<std::string>(grid, "grid", "domain", "compact");
    if (domain == "compact") {
        cfg.grid.domain = CompactUnit{};
    } else if (domain == "half_line") {
        cfg.grid.domain = HalfLine{get<double>(grid, "grid", "length", 4.0),
                                   get<double>(grid, "grid", "weight_r", 0.0)};
    } else {
        throw Error(ErrorKind::ConfigError, "field grid.domain must be compact or half_line" +
                                                where(grid["domain"]));
    }

    const YAML::Node coeffs = root["coefficients"];
    cfg.model.coeffs.f1 = parse_coefficient(coeffs ? coeffs["f1"] : YAML::Node(), "coefficients.f1");
    cfg.model.coeffs.f2 = parse_coefficient(coeffs ? coeffs["f2"] : YAML::Node(), "coefficients.f2");
    cfg.model.coeffs.sigma1 =
        parse_coefficient(coeffs ? coeffs["sigma1"] : YAML::Node(), "coefficients.sigma1");
    cfg.model.coeffs.sigma2 =
        parse_coefficient(coeffs ? coeffs["sigma2"] : YAML::Node(), "coefficients.sigma2");
    cfg.model.coeffs.r = get<double>(coeffs, "coefficients", "r", 0.0);
    cfg.model.coeffs.delta = get<double>(coeffs, "coefficients", "delta", 0.0);

    cfg.model.boundary = parse_boundary(root["boundary"]);

    const YAML::Node model = root["model"];
    cfg.model.M = get_level(model, "model", "M");
    cfg.model.M_max = get_level(model, "model", "M_max");
    cfg.model.lap_scale = get<double>(model, "model", "lap_scale", 1.0);
    cfg.p0 = get<double>(model, "model", "p0", 0.0);
    cfg.initial1 = parse_initial(model ? model["initial1"] : YAML::Node(), "model.initial1");
    cfg.initial2 = parse_initial(model ? model["initial2"] : YAML::Node(), "model.initial2");
    if (cfg.grid.nx > 0) {
        if (const auto* half = std::get_if<HalfLine>(&cfg.grid.domain)) {
            cfg.model.boundary.weight_r = half->weight_r;
        }
    }

    cfg.seed = get<std::uint64_t>(root["noise"], "noise", "seed", 0);

    const YAML::Node output = root["output"];
    cfg.output_dir = get<std::string>(output, "output", "dir", "out");
    cfg.stride = get<int>(output, "output", "stride", 0);
    if (cfg.stride < 0) {
        throw Error(ErrorKind::ConfigError, "field output.stride must be >= 0");
    }

    const YAML::Node obs = root["obstacle"];
    cfg.obstacle.method = get<std::string>(obs, "obstacle", "method", "projected");
    cfg.obstacle.epsilon = get<double>(obs, "obstacle", "epsilon", 1e-4);
    cfg.obstacle.kind = get<std::string>(obs, "obstacle", "kind", "sine");
    cfg.obstacle.amplitude = get<double>(obs, "obstacle", "amplitude", 5.0);
    cfg.obstacle.t_cap = get<double>(obs, "obstacle", "t_cap", 0.02);
    cfg.obstacle.value = get<double>(obs, "obstacle", "value", -1.0);
    if (cfg.obstacle.method != "projected" && cfg.obstacle.method != "penalized") {
        throw Error(ErrorKind::ConfigError, "field obstacle.method must be projected or penalized");
    }
    if (cfg.obstacle.kind != "sine" && cfg.obstacle.kind != "constant") {
        throw Error(ErrorKind::ConfigError, "field obstacle.kind must be sine or constant");
    }

    const YAML::Node pic = root["picard"];
    cfg.picard.iterations = get<int>(pic, "picard", "iterations", 12);
    cfg.picard.tolerance = get<double>(pic, "picard", "tolerance", 1e-4);
    cfg.picard.compare_direct = get<bool>(pic, "picard", "compare_direct", true);

    const YAML::Node hol = root["holder"];
    cfg.holder.paths = get<int>(hol, "holder", "paths", 20);
    cfg.holder.q = get<double>(hol, "holder", "q", 2.0);
    cfg.holder.time_lags = lag_pair(hol, "holder", "time_lags", {8, 256});
    cfg.holder.space_lags = lag_pair(hol, "holder", "space_lags", {1, 8});
    cfg.holder.boundary_lags = lag_pair(hol, "holder", "boundary_lags", {8, 64});
    cfg.holder.margin = get<double>(hol, "holder", "margin", 0.1);
    cfg.holder.threads = get<int>(hol, "holder", "threads", 1);
    if (cfg.holder.paths < 1 || cfg.holder.threads < 1) {
        throw Error(ErrorKind::ConfigError, "fields holder.paths and holder.threads must be >= 1");
    }

    const YAML::Node kc = root["kernel_check"];
    cfg.kernel_check.t_min = get<double>(kc, "kernel_check", "t_min", 1e-4);
    cfg.kernel_check.t_max = get<double>(kc, "kernel_check", "t_max", 0.1);
    cfg.kernel_check.count = get<int>(kc, "kernel_check", "count", 9);
    cfg.kernel_check.r = get<double>(kc, "kernel_check", "r", 0.0);
    cfg.kernel_check.x_samples =
        get<std::vector<double>>(kc, "kernel_check", "x_samples", cfg.kernel_check.x_samples);

    const YAML::Node lob = root["lob"];
    cfg.lob.input = get<std::string>(lob, "lob", "input", "");
    cfg.lob.format = get<std::string>(lob, "lob", "format", "normalized");
    cfg.lob.touch = get<std::string>(lob, "lob", "touch", "");
    cfg.lob.orderbook = get<std::string>(lob, "lob", "orderbook", "");
    cfg.lob.n_bins = get<int>(lob, "lob", "n_bins", 10);
    cfg.lob.pool_sides = get<bool>(lob, "lob", "pool_sides", true);
    cfg.lob.interval = get<double>(lob, "lob", "interval", 1.0);
    cfg.lob.max_malformed = get<long>(lob, "lob", "max_malformed", 0);
    cfg.lob.price_window = get<double>(lob, "lob", "price_window", 1.0);
    cfg.lob.fit = get<std::string>(lob, "lob", "fit", "");
    cfg.lob.lap_scale = get<double>(lob, "lob", "lap_scale", 0.2);
    if (cfg.lob.format != "normalized" && cfg.lob.format != "lobster") {
        throw Error(ErrorKind::ConfigError, "field lob.format must be normalized or lobster");
    }

    spde::validate(cfg.model);
    // the output location does not change any result, so it stays out of the hash
    YAML::Node hashed = YAML::Clone(root);
    if (hashed["output"] && hashed["output"].IsMap()) {
        hashed["output"].remove("dir");
        if (hashed["output"].size() == 0) {
            hashed.remove("output");
        }
    }
    YAML::Emitter emitter;
    emitter << hashed;
    cfg.resolved = emitter.c_str();
    cfg.hash = fnv1a(cfg.resolved);
    return cfg;
}

Config finish(YAML::Node root, const std::vector<std::string>& overrides,
              std::optional<std::uint64_t> seed, std::optional<std::string> output_dir) {
    if (!root || root.IsNull()) {
        root = YAML::Node(YAML::NodeType::Map);
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }
    if (seed) {
        root["noise"]["seed"] = *seed;
    }
    if (output_dir) {
        root["output"]["dir"] = *output_dir;
    }
    return build(root);
}

}  // namespace

Eigen::VectorXd InitialProfile::sample(const GridSpec& grid) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.n_nodes());
    if (kind == "sine") {
        for (int j = 1; j < grid.nx(); ++j) {
            v[j] = amplitude * std::sin(std::numbers::pi * grid.x(j) / grid.length());
        }
    }
    return v;
}

Field ObstacleConfig::sample(const GridSpec& grid) const {
    if (kind == "constant") {
        return sample_field(grid, [&](double, double) { return value; });
    }
    return sample_field(grid, [&](double t, double x) {
        return amplitude * std::sin(std::numbers::pi * x / grid.length()) * std::min(t, t_cap);
    });
}

std::uint64_t fnv1a(const std::string& text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string header_line(const Config& cfg) {
    return "# rsmb config_hash=" + hash_hex(cfg.hash) + " seed=" + std::to_string(cfg.seed);
}

Config parse(const std::string& yaml, const std::vector<std::string>& overrides,
             std::optional<std::uint64_t> seed, std::optional<std::string> output_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("unreadable YAML: ") + e.what());
    }
    return finish(root, overrides, seed, std::move(output_dir));
}

Config load(const std::string& path, const std::vector<std::string>& overrides,
            std::optional<std::uint64_t> seed, std::optional<std::string> output_dir) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), overrides, seed, std::move(output_dir));
}

}  // namespace rsmb::config
