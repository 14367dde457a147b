#include "rsmb/lob.hpp"

#include "rsmb/errors.hpp"
#include "rsmb/spde.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string_view>

namespace rsmb::lob {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<long long> to_integer(std::string_view s) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_header(std::string_view line) {
    const auto first = trim(line.substr(0, line.find(',')));
    return !first.empty() && !to_double(first);
}

std::optional<Event> parse_normalized(const std::vector<std::string_view>& cols) {
    if (cols.size() != 5) {
        return std::nullopt;
    }
    Event e;
    const auto time = to_double(cols[0]);
    const auto price = to_double(cols[3]);
    const auto size = to_double(cols[4]);
    if (!time || !price || !size || *size <= 0.0 || *price < 0.0) {
        return std::nullopt;
    }
    const std::string side = lower(cols[1]);
    if (side == "bid" || side == "b" || side == "buy") {
        e.side = BookSide::Bid;
    } else if (side == "ask" || side == "a" || side == "sell") {
        e.side = BookSide::Ask;
    } else {
        return std::nullopt;
    }
    const std::string type = lower(cols[2]);
    if (type == "limit") {
        e.type = EventType::Limit;
    } else if (type == "cancel") {
        e.type = EventType::Cancel;
    } else if (type == "market") {
        e.type = EventType::Market;
    } else {
        return std::nullopt;
    }
    e.time = *time;
    e.relative_price = *price;
    e.size = *size;
    return e;
}

enum class LobsterRow { Event, Skip, Malformed };

LobsterRow parse_lobster(const std::vector<std::string_view>& cols, const TouchSeries& touch,
                         Event& e) {
    if (cols.size() != 6) {
        return LobsterRow::Malformed;
    }
    const auto time = to_double(cols[0]);
    const auto type = to_integer(cols[1]);
    const auto size = to_double(cols[3]);
    const auto price = to_integer(cols[4]);
    const auto direction = to_integer(cols[5]);
    if (!time || !type || !size || !price || !direction || !to_integer(cols[2])) {
        return LobsterRow::Malformed;
    }
    switch (*type) {
        case 1: e.type = EventType::Limit; break;
        case 2:
        case 3: e.type = EventType::Cancel; break;
        case 4:
        case 5: e.type = EventType::Market; break;
        case 6:
        case 7: return LobsterRow::Skip;
        default: return LobsterRow::Malformed;
    }
    if (*size <= 0.0 || (*direction != 1 && *direction != -1)) {
        return LobsterRow::Malformed;
    }
    // direction is the side of the resting order: 1 buy (bid), -1 sell (ask)
    e.side = *direction == 1 ? BookSide::Bid : BookSide::Ask;
    e.time = *time;
    e.size = *size;
    const std::size_t k = touch.index_before(e.time);
    const double dollars = static_cast<double>(*price) * 1e-4;
    const double rel = e.side == BookSide::Bid ? touch.best_bid[k] - dollars : dollars - touch.best_ask[k];
    // orders improving the touch sit at the new touch
    e.relative_price = std::max(rel, 0.0);
    return LobsterRow::Event;
}

std::vector<std::vector<std::string_view>> numeric_rows(std::istream& in,
                                                        std::vector<std::string>& storage) {
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            storage.push_back(line);
        }
    }
    std::vector<std::vector<std::string_view>> rows;
    for (std::size_t k = 0; k < storage.size(); ++k) {
        if (k == 0 && is_header(storage[k])) {
            continue;
        }
        rows.push_back(split(storage[k]));
    }
    return rows;
}

std::size_t bin_of(double x, int n_bins) {
    const auto b = static_cast<long>(std::floor(x * n_bins));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, n_bins - 1));
}

double signed_volume(const Event& e) {
    return e.type == EventType::Limit ? e.size : -e.size;
}

std::vector<Bin> fit_side(const EventStream& stream, BookSide side, int n_bins,
                          const FitOptions& options) {
    const double width = 1.0 / n_bins;
    const double horizon = stream.horizon();
    const auto intervals = std::max<long>(1, std::lround(horizon / options.interval));
    const double covered = static_cast<double>(intervals) * options.interval;
    Eigen::MatrixXd net = Eigen::MatrixXd::Zero(n_bins, intervals);
    std::vector<long> counts(static_cast<std::size_t>(n_bins), 0);
    for (const Event& e : stream.events) {
        if (e.side != side) {
            continue;
        }
        const std::size_t b = bin_of(e.relative_price, n_bins);
        const auto k = std::clamp<long>(
            static_cast<long>(std::floor((e.time - stream.t_start) / options.interval)), 0,
            intervals - 1);
        net(static_cast<Eigen::Index>(b), k) += signed_volume(e);
        ++counts[b];
    }
    std::vector<Bin> bins(static_cast<std::size_t>(n_bins));
    for (int b = 0; b < n_bins; ++b) {
        Bin& bin = bins[static_cast<std::size_t>(b)];
        bin.x_center = (b + 0.5) * width;
        bin.count = counts[static_cast<std::size_t>(b)];
        if (bin.count < options.min_events || bin.count == 0) {
            bin.insufficient = true;
            continue;
        }
        const auto row = net.row(b);
        bin.f = row.sum() / (horizon * width);
        const double mean = row.mean();
        bin.sigma = std::sqrt((row.array() - mean).square().sum() / (covered * width));
    }
    return bins;
}

}  // namespace

std::string to_string(BookSide side) { return side == BookSide::Bid ? "bid" : "ask"; }

std::string to_string(EventType type) {
    switch (type) {
        case EventType::Limit: return "limit";
        case EventType::Cancel: return "cancel";
        case EventType::Market: return "market";
    }
    return "unknown";
}

std::size_t TouchSeries::index_before(double t) const {
    if (time.empty()) {
        throw Error(ErrorKind::InsufficientData, "empty touch series");
    }
    const auto it = std::lower_bound(time.begin(), time.end(), t);
    if (it == time.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(time.begin(), it) - 1);
}

EventStream parse_events(std::istream& in, const ParseOptions& options, const TouchSeries* touch) {
    if (options.format == Format::LobsterMessage && touch == nullptr) {
        throw Error(ErrorKind::ConfigError, "LOBSTER messages need a touch price series");
    }
    EventStream stream;
    std::vector<std::string> storage;
    const auto rows = numeric_rows(in, storage);
    double last_time = -HUGE_VAL;
    for (const auto& cols : rows) {
        Event e;
        bool ok = false;
        if (options.format == Format::Normalized) {
            if (auto parsed = parse_normalized(cols)) {
                e = *parsed;
                ok = true;
            }
        } else {
            const LobsterRow kind = parse_lobster(cols, *touch, e);
            if (kind == LobsterRow::Skip) {
                ++stream.skipped;
                continue;
            }
            ok = kind == LobsterRow::Event;
        }
        if (!ok) {
            if (++stream.malformed > options.max_malformed) {
                throw Error(ErrorKind::FormatError,
                            std::to_string(stream.malformed) + " malformed rows exceed the threshold of " +
                                std::to_string(options.max_malformed));
            }
            continue;
        }
        if (e.time < last_time) {
            throw Error(ErrorKind::NonMonotoneTime, "event time " + std::to_string(e.time) +
                                                        " precedes " + std::to_string(last_time));
        }
        last_time = e.time;
        if (e.relative_price > options.price_window) {
            ++stream.filtered;
            continue;
        }
        stream.events.push_back(e);
    }
    if (!stream.events.empty()) {
        stream.t_start = stream.events.front().time;
        stream.t_end = stream.events.back().time;
    }
    if (options.t_start) {
        stream.t_start = *options.t_start;
    }
    if (options.t_end) {
        stream.t_end = *options.t_end;
    }
    return stream;
}

TouchSeries read_touch_csv(std::istream& in) {
    TouchSeries touch;
    std::vector<std::string> storage;
    for (const auto& cols : numeric_rows(in, storage)) {
        const auto t = cols.size() == 3 ? to_double(cols[0]) : std::nullopt;
        const auto bid = cols.size() == 3 ? to_double(cols[1]) : std::nullopt;
        const auto ask = cols.size() == 3 ? to_double(cols[2]) : std::nullopt;
        if (!t || !bid || !ask) {
            throw Error(ErrorKind::FormatError, "touch rows need time,best_bid,best_ask");
        }
        if (!touch.time.empty() && *t < touch.time.back()) {
            throw Error(ErrorKind::NonMonotoneTime, "touch series times must be nondecreasing");
        }
        touch.time.push_back(*t);
        touch.best_bid.push_back(*bid);
        touch.best_ask.push_back(*ask);
    }
    return touch;
}

TouchSeries touch_from_lobster(std::istream& orderbook, std::istream& message) {
    TouchSeries touch;
    std::string book_line;
    std::string msg_line;
    while (std::getline(orderbook, book_line)) {
        if (trim(book_line).empty()) {
            continue;
        }
        do {
            if (!std::getline(message, msg_line)) {
                throw Error(ErrorKind::FormatError, "orderbook file has more rows than the message file");
            }
        } while (trim(msg_line).empty());
        const auto book = split(book_line);
        const auto msg = split(msg_line);
        const auto t = to_double(msg.front());
        const auto ask = book.size() >= 4 ? to_integer(book[0]) : std::nullopt;
        const auto bid = book.size() >= 4 ? to_integer(book[2]) : std::nullopt;
        if (!t || !ask || !bid) {
            throw Error(ErrorKind::FormatError, "unreadable LOBSTER orderbook/message row");
        }
        if (!touch.time.empty() && *t < touch.time.back()) {
            throw Error(ErrorKind::NonMonotoneTime, "message times must be nondecreasing");
        }
        touch.time.push_back(*t);
        touch.best_ask.push_back(static_cast<double>(*ask) * 1e-4);
        touch.best_bid.push_back(static_cast<double>(*bid) * 1e-4);
    }
    return touch;
}

void write_events_csv(std::ostream& out, const EventStream& stream) {
    out << "time,side,event_type,relative_price,size\n";
    out.precision(17);
    for (const Event& e : stream.events) {
        out << e.time << ',' << to_string(e.side) << ',' << to_string(e.type) << ','
            << e.relative_price << ',' << e.size << '\n';
    }
}

FitResult fit_coefficients(const EventStream& stream, int n_bins, bool pool_sides,
                           const FitOptions& options) {
    if (n_bins < 4) {
        throw Error(ErrorKind::ConfigError, "fit needs n_bins >= 4");
    }
    if (!(options.interval > 0.0)) {
        throw Error(ErrorKind::ConfigError, "aggregation interval must be > 0");
    }
    if (!(stream.horizon() > 0.0)) {
        throw Error(ErrorKind::InsufficientData, "event stream has a non-positive horizon");
    }
    FitResult fit;
    fit.horizon = stream.horizon();
    fit.bid = fit_side(stream, BookSide::Bid, n_bins, options);
    fit.ask = fit_side(stream, BookSide::Ask, n_bins, options);
    fit.symmetric = pool_sides;
    if (pool_sides) {
        for (std::size_t b = 0; b < fit.bid.size(); ++b) {
            Bin& bid = fit.bid[b];
            const Bin& ask = fit.ask[b];
            Bin pooled{bid.x_center, 0.5 * (bid.f + ask.f),
                       std::sqrt(0.5 * (bid.sigma * bid.sigma + ask.sigma * ask.sigma)),
                       bid.count + ask.count, bid.insufficient && ask.insufficient};
            if (bid.insufficient != ask.insufficient) {
                // one side is empty: use the other alone
                pooled = bid.insufficient ? ask : bid;
                pooled.count = bid.count + ask.count;
            }
            bid = pooled;
        }
        fit.ask = fit.bid;
    }
    return fit;
}

void write_fit_csv(std::ostream& out, const FitResult& fit) {
    out.precision(17);
    if (fit.symmetric) {
        out << "x_center,f,sigma,count\n";
        for (const Bin& b : fit.bid) {
            out << b.x_center << ',' << b.f << ',' << b.sigma << ',' << b.count << '\n';
        }
        return;
    }
    out << "side,x_center,f,sigma,count\n";
    for (BookSide side : {BookSide::Bid, BookSide::Ask}) {
        for (const Bin& b : fit.bins(side)) {
            out << to_string(side) << ',' << b.x_center << ',' << b.f << ',' << b.sigma << ','
                << b.count << '\n';
        }
    }
}

FitResult read_fit_csv(std::istream& in) {
    FitResult fit;
    std::string line;
    bool sided = false;
    bool header_seen = false;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            sided = t.rfind("side", 0) == 0;
            if (is_header(t)) {
                continue;
            }
        }
        auto cols = split(t);
        BookSide side = BookSide::Bid;
        if (sided) {
            if (cols.size() != 5) {
                throw Error(ErrorKind::FormatError, "fit rows need side,x_center,f,sigma,count");
            }
            side = lower(cols[0]) == "ask" ? BookSide::Ask : BookSide::Bid;
            cols.erase(cols.begin());
        }
        if (cols.size() != 4) {
            throw Error(ErrorKind::FormatError, "fit rows need x_center,f,sigma,count");
        }
        const auto x = to_double(cols[0]);
        const auto f = to_double(cols[1]);
        const auto s = to_double(cols[2]);
        const auto c = to_integer(cols[3]);
        if (!x || !f || !s || !c) {
            throw Error(ErrorKind::FormatError, "unreadable fit row: " + std::string(t));
        }
        const long count = static_cast<long>(c.value());
        Bin bin{x.value(), f.value(), s.value(), count, count == 0};
        (side == BookSide::Bid ? fit.bid : fit.ask).push_back(bin);
    }
    fit.symmetric = !sided;
    if (fit.symmetric) {
        fit.ask = fit.bid;
    }
    if (fit.bid.empty() || fit.ask.empty()) {
        throw Error(ErrorKind::FormatError, "fit file has no bins");
    }
    return fit;
}

TableCoef drift_table(const std::vector<Bin>& bins) {
    TableCoef table;
    for (const Bin& b : bins) {
        table.centers.push_back(b.x_center);
        table.values.push_back(b.f);
    }
    return table;
}

TableCoef volatility_table(const std::vector<Bin>& bins) {
    TableCoef table;
    for (const Bin& b : bins) {
        table.centers.push_back(b.x_center);
        table.values.push_back(b.sigma);
    }
    return table;
}

BinRates rates_for(double f, double sigma, double size, double width) {
    if (!(size > 0.0) || !(width > 0.0) || !(sigma >= 0.0)) {
        throw Error(ErrorKind::ConfigError, "rates need size > 0, width > 0, sigma >= 0");
    }
    const double drift = f * width / size;                     // limit - cancel
    const double total = sigma * sigma * width / (size * size);  // limit + cancel
    if (total < std::abs(drift)) {
        throw Error(ErrorKind::ConfigError, "sigma^2 < |f| * size: no nonnegative Poisson intensities");
    }
    return BinRates{0.5 * (total + drift), 0.5 * (total - drift), 0.0};
}

EventStream generate_stream(const SyntheticSpec& spec) {
    if (spec.bid.empty() || spec.bid.size() != spec.ask.size()) {
        throw Error(ErrorKind::ConfigError, "synthetic spec needs the same nonzero bin count per side");
    }
    if (!(spec.horizon > 0.0) || !(spec.size > 0.0)) {
        throw Error(ErrorKind::ConfigError, "synthetic spec needs horizon > 0 and size > 0");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double width = 1.0 / static_cast<double>(spec.bid.size());
    EventStream stream;
    auto emit = [&](BookSide side, EventType type, double rate, std::size_t b) {
        if (!(rate > 0.0)) {
            return;
        }
        std::exponential_distribution<double> gap(rate);
        for (double t = gap(rng); t < spec.horizon; t += gap(rng)) {
            const double x = type == EventType::Market ? 0.0 : (b + unit(rng)) * width;
            stream.events.push_back(Event{t, side, type, x, spec.size});
        }
    };
    for (BookSide side : {BookSide::Bid, BookSide::Ask}) {
        const auto& rates = side == BookSide::Bid ? spec.bid : spec.ask;
        for (std::size_t b = 0; b < rates.size(); ++b) {
            emit(side, EventType::Limit, rates[b].limit, b);
            emit(side, EventType::Cancel, rates[b].cancel, b);
            emit(side, EventType::Market, rates[b].market, b);
        }
    }
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    stream.t_start = 0.0;
    stream.t_end = spec.horizon;
    return stream;
}

PriceSeries simulate_price(const FitResult& fit, const boundary::BoundaryFunctional& boundary,
                           const GridSpec& grid, std::uint64_t seed, const PriceOptions& options) {
    if (grid.is_half_line()) {
        throw Error(ErrorKind::ConfigError, "price simulation runs on the unit interval");
    }
    spde::Model model;
    model.coeffs.f1 = drift_table(fit.bid);
    model.coeffs.f2 = drift_table(fit.ask);
    model.coeffs.sigma1 = volatility_table(fit.bid);
    model.coeffs.sigma2 = volatility_table(fit.ask);
    model.boundary = boundary;
    model.lap_scale = options.lap_scale;

    const int n = grid.n_nodes();
    Eigen::VectorXd v1 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v2 = Eigen::VectorXd::Zero(n);
    if (options.stationary_start) {
        // -lap_scale * D2 v = f on the interior nodes
        const int m = grid.nx() - 1;
        const double k = options.lap_scale / (grid.dx() * grid.dx());
        Eigen::SparseMatrix<double> A(m, m);
        std::vector<Eigen::Triplet<double>> entries;
        for (int j = 0; j < m; ++j) {
            entries.emplace_back(j, j, 2.0 * k);
            if (j > 0) {
                entries.emplace_back(j, j - 1, -k);
                entries.emplace_back(j - 1, j, -k);
            }
        }
        A.setFromTriplets(entries.begin(), entries.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
        Eigen::VectorXd rhs1(m);
        Eigen::VectorXd rhs2(m);
        for (int j = 0; j < m; ++j) {
            rhs1[j] = evaluate(model.coeffs.f1, grid.x(j + 1), 0.0);
            rhs2[j] = evaluate(model.coeffs.f2, grid.x(j + 1), 0.0);
        }
        v1.segment(1, m) = solver.solve(rhs1).cwiseMax(0.0);
        v2.segment(1, m) = solver.solve(rhs2).cwiseMax(0.0);
    }
    const spde::Trajectory traj = spde::run_relative_frame(v1, v2, options.p0, model, grid, seed);
    return PriceSeries{traj.t, traj.p, traj.p_prime, traj.blown_up()};
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
    out << "t,p\n";
    out.precision(17);
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        out << series.t[k] << ',' << series.p[k] << '\n';
    }
}

}  // namespace rsmb::lob
