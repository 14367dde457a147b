#pragma once

#include "rsmb/boundary.hpp"
#include "rsmb/coefficients.hpp"
#include "rsmb/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rsmb::lob {

enum class BookSide { Bid, Ask };
enum class EventType { Limit, Cancel, Market };

std::string to_string(BookSide side);
std::string to_string(EventType type);

struct Event {
    double time = 0.0;  // seconds
    BookSide side = BookSide::Bid;
    EventType type = EventType::Limit;
    double relative_price = 0.0;  // dollars from the touch
    double size = 0.0;            // shares
};

struct EventStream {
    std::vector<Event> events;
    double t_start = 0.0;
    double t_end = 0.0;
    long malformed = 0;
    /// rows that parse but carry no order flow (LOBSTER types 6, 7)
    long skipped = 0;
    /// events outside the relative price window
    long filtered = 0;

    double horizon() const noexcept { return t_end - t_start; }
};

enum class Format { Normalized, LobsterMessage };

/// Best bid / ask in dollars over time (step function, right-continuous).
struct TouchSeries {
    std::vector<double> time;
    std::vector<double> best_bid;
    std::vector<double> best_ask;

    /// Touch in force strictly before time t (the book the event arrived at);
    /// the first entry is used for events at or before the first time.
    std::size_t index_before(double t) const;
};

struct ParseOptions {
    Format format = Format::Normalized;
    /// more malformed rows than this raises FormatError
    long max_malformed = 0;
    /// relative prices above this are dropped (counted in `filtered`)
    double price_window = 1.0;
    /// overrides the horizon taken from the first and last event
    std::optional<double> t_start;
    std::optional<double> t_end;
};

/// Normalized CSV `time,side,event_type,relative_price,size` (header optional),
/// or a LOBSTER message file (time,type,order_id,size,price,direction with prices
/// in 1e-4 dollars) together with the touch series. Throws NonMonotoneTime,
/// FormatError, ConfigError (LOBSTER input without a touch series).
EventStream parse_events(std::istream& in, const ParseOptions& options,
                         const TouchSeries* touch = nullptr);

/// CSV `time,best_bid,best_ask` in dollars.
TouchSeries read_touch_csv(std::istream& in);

/// Touch series from a LOBSTER orderbook file (row k is the book after message
/// k; columns ask_price_1, ask_size_1, bid_price_1, bid_size_1, ...) and the
/// matching message file for the times.
TouchSeries touch_from_lobster(std::istream& orderbook, std::istream& message);

void write_events_csv(std::ostream& out, const EventStream& stream);

struct Bin {
    double x_center = 0.0;
    double f = 0.0;
    double sigma = 0.0;
    long count = 0;
    bool insufficient = false;
};

struct FitOptions {
    /// aggregation interval of the volatility estimate, seconds
    double interval = 1.0;
    /// bins with fewer events are flagged (f = sigma = 0)
    long min_events = 1;
};

struct FitResult {
    std::vector<Bin> bid;
    std::vector<Bin> ask;
    bool symmetric = false;
    double horizon = 0.0;

    const std::vector<Bin>& bins(BookSide side) const { return side == BookSide::Bid ? bid : ask; }
};

/// Binned net-flow estimator on [0, 1] with n_bins bins of width D:
///   f = (limit - cancel - market volume) / (H D),
///   sigma^2 = sum_k (N_k - mean N)^2 / (H D), N_k the net volume of interval k.
/// With pool_sides the two sides share f = mean of the side estimates and
/// sigma^2 = mean of the side variances.
FitResult fit_coefficients(const EventStream& stream, int n_bins, bool pool_sides,
                           const FitOptions& options = {});

/// x_center,f,sigma,count (pooled) or side,x_center,f,sigma,count.
void write_fit_csv(std::ostream& out, const FitResult& fit);
FitResult read_fit_csv(std::istream& in);

/// Linear-interpolation tables of f and sigma over the bin centers.
TableCoef drift_table(const std::vector<Bin>& bins);
TableCoef volatility_table(const std::vector<Bin>& bins);

/// Poisson intensities (events per second) of one bin and side.
struct BinRates {
    double limit = 0.0;
    double cancel = 0.0;
    double market = 0.0;
};

/// Limit / cancel rates with unit-size orders of `size` shares that produce the
/// drift f and volatility sigma in a bin of width `width`. Throws ConfigError when
/// sigma^2 < |f| size (negative intensity).
BinRates rates_for(double f, double sigma, double size, double width);

struct SyntheticSpec {
    /// rates per bin; bins cover [0, 1] uniformly
    std::vector<BinRates> bid;
    std::vector<BinRates> ask;
    double size = 1.0;
    double horizon = 1000.0;
    std::uint64_t seed = 1;
};

/// Independent Poisson streams per (side, bin, type), prices uniform in the bin,
/// market orders at the touch.
EventStream generate_stream(const SyntheticSpec& spec);

struct PriceSeries {
    std::vector<double> t;
    std::vector<double> p;
    std::vector<double> p_prime;
    bool blown_up = false;
};

struct PriceOptions {
    double lap_scale = 0.2;
    double p0 = 0.0;
    /// profiles start from the stationary solution of lap_scale v'' + f = 0 (clipped at 0)
    bool stationary_start = true;
};

/// Relative-frame simulation with the fitted tables as coefficients.
PriceSeries simulate_price(const FitResult& fit, const boundary::BoundaryFunctional& boundary,
                           const GridSpec& grid, std::uint64_t seed, const PriceOptions& options = {});

/// t,p
void write_price_csv(std::ostream& out, const PriceSeries& series);

}  // namespace rsmb::lob
