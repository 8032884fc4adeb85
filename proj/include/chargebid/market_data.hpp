#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "chargebid/csv.hpp"
#include "chargebid/errors.hpp"

// Historical auction price handling: CSV ingest into day-by-interval matrices,
// Z-score outlier removal, and confidence trimming (quantile clipping).

namespace chargebid {

enum class Market { DayAhead, Intraday };

/// Trading intervals per day: hourly for the day-ahead auction, quarter-hourly intraday.
constexpr int intervals_per_day(Market m) { return m == Market::DayAhead ? 24 : 96; }

/// Row-major matrix of prices, one row per day, one column per trading interval.
struct PriceMatrix {
    std::size_t cols = 0;
    std::vector<double> data;

    PriceMatrix() = default;
    explicit PriceMatrix(std::size_t columns) : cols(columns) {}

    std::size_t rows() const { return cols ? data.size() / cols : 0; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    void append_row(const std::vector<double>& row) {
        if (row.size() != cols) throw InternalError("price matrix row width mismatch");
        data.insert(data.end(), row.begin(), row.end());
    }

    std::vector<double> row(std::size_t r) const {
        return std::vector<double>(data.begin() + r * cols, data.begin() + (r + 1) * cols);
    }
};

struct IngestResult {
    PriceMatrix prices;
    std::vector<std::string> dates;  // ISO date per kept row, in first-appearance order
    std::size_t dropped_days = 0;    // days rejected for missing/extra intervals
};

namespace detail {

struct Timestamp {
    std::string date;  // YYYY-MM-DD
    int hour = 0;
    int minute = 0;
};

inline bool all_digits(const std::string& s) {
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return !s.empty();
}

/// Accepts ISO-8601 "YYYY-MM-DDThh:mm[...]" (space instead of 'T' allowed; trailing
/// seconds or zone designators ignored).
inline Timestamp parse_timestamp(const std::string& raw, std::size_t line_no) {
    const std::string s = csv::trim(raw);
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        throw ParseError("bad timestamp '" + s + "'", line_no);
    Timestamp ts;
    ts.date = s.substr(0, 10);
    const std::string hh = s.substr(11, 2), mm = s.substr(14, 2);
    if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)) ||
        !all_digits(hh) || !all_digits(mm))
        throw ParseError("bad timestamp '" + s + "'", line_no);
    ts.hour = (hh[0] - '0') * 10 + (hh[1] - '0');
    ts.minute = (mm[0] - '0') * 10 + (mm[1] - '0');
    if (ts.hour > 23 || ts.minute > 59) throw ParseError("bad timestamp '" + s + "'", line_no);
    return ts;
}

}  // namespace detail

/// Reads `timestamp,price_eur_per_mwh` rows and assembles one matrix row per complete
/// day. Days with missing or duplicate intervals are dropped and counted, never
/// silently filled. Day order follows first appearance in the file.
inline IngestResult ingest_prices(const std::vector<std::string>& lines, Market market,
                                  const std::string& source = "") {
    const int n_iv = intervals_per_day(market);
    if (lines.empty()) throw ParseError("empty price file " + source);
    {
        const auto header = csv::split(lines[0]);
        if (header.size() != 2 || csv::trim(header[0]) != "timestamp" ||
            csv::trim(header[1]) != "price_eur_per_mwh")
            throw ParseError("expected header 'timestamp,price_eur_per_mwh' in " + source, 1);
    }

    struct Day {
        std::vector<double> values;
        std::vector<char> seen;
        bool duplicate = false;
        std::size_t count = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Day> days;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto fields = csv::split(lines[i]);
        if (fields.size() != 2) throw ParseError("expected 2 fields", i + 1);
        const auto ts = detail::parse_timestamp(fields[0], i + 1);
        const double price = csv::parse_double(fields[1], i + 1);

        int slot;
        if (market == Market::DayAhead) {
            if (ts.minute != 0) throw ParseError("day-ahead timestamp not on the hour", i + 1);
            slot = ts.hour;
        } else {
            if (ts.minute % 15 != 0) throw ParseError("intraday timestamp not on a quarter hour", i + 1);
            slot = ts.hour * 4 + ts.minute / 15;
        }

        auto it = days.find(ts.date);
        if (it == days.end()) {
            order.push_back(ts.date);
            it = days.emplace(ts.date, Day{std::vector<double>(n_iv, 0.0),
                                           std::vector<char>(n_iv, 0), false, 0}).first;
        }
        Day& d = it->second;
        if (d.seen[slot]) {
            d.duplicate = true;  // conflicting data: treat the whole day as unusable
        } else {
            d.seen[slot] = 1;
            d.values[slot] = price;
            ++d.count;
        }
    }

    IngestResult out;
    out.prices = PriceMatrix(n_iv);
    for (const auto& date : order) {
        const Day& d = days.at(date);
        if (d.duplicate || d.count != static_cast<std::size_t>(n_iv)) {
            ++out.dropped_days;
        } else {
            out.prices.append_row(d.values);
            out.dates.push_back(date);
        }
    }
    return out;
}

inline IngestResult ingest_prices_file(const std::string& path, Market market) {
    return ingest_prices(csv::read_lines(path), market, path);
}

/// Removes whole days whose prices deviate too far from the mean. Z-scores use the
/// population standard deviation over all entries (or per column when `per_column`);
/// a zero deviation makes every Z-score zero, so nothing is removed.
inline PriceMatrix zscore_filter(const PriceMatrix& m, double threshold, bool per_column = false) {
    if (threshold <= 0.0) throw InputError("z-score threshold must be positive");
    const std::size_t R = m.rows(), C = m.cols;
    if (R == 0) return m;

    std::vector<double> mean(per_column ? C : 1, 0.0), sd(per_column ? C : 1, 0.0);
    if (per_column) {
        for (std::size_t c = 0; c < C; ++c) {
            double s = 0;
            for (std::size_t r = 0; r < R; ++r) s += m.at(r, c);
            mean[c] = s / static_cast<double>(R);
            double v = 0;
            for (std::size_t r = 0; r < R; ++r) {
                const double d = m.at(r, c) - mean[c];
                v += d * d;
            }
            sd[c] = std::sqrt(v / static_cast<double>(R));
        }
    } else {
        double s = 0;
        for (double x : m.data) s += x;
        mean[0] = s / static_cast<double>(m.data.size());
        double v = 0;
        for (double x : m.data) v += (x - mean[0]) * (x - mean[0]);
        sd[0] = std::sqrt(v / static_cast<double>(m.data.size()));
    }

    PriceMatrix out(C);
    for (std::size_t r = 0; r < R; ++r) {
        bool keep = true;
        for (std::size_t c = 0; c < C && keep; ++c) {
            const double mu = mean[per_column ? c : 0], sig = sd[per_column ? c : 0];
            const double z = sig == 0.0 ? 0.0 : (m.at(r, c) - mu) / sig;
            if (std::fabs(z) > threshold) keep = false;
        }
        if (keep) out.append_row(m.row(r));
    }
    return out;
}

/// Linear-interpolation empirical quantile of a sorted sample at probability p,
/// using index h = (n-1)p.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw InputError("quantile of empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Clips each column to its [eps/2, 1-eps/2] empirical quantile band. eps = 0 leaves
/// the data unchanged; larger eps concentrates prices toward the median.
inline PriceMatrix trim_confidence(const PriceMatrix& m, double eps) {
    if (eps < 0.0 || eps >= 1.0) throw InputError("confidence epsilon must be in [0, 1)");
    if (m.rows() < 2) throw InputError("confidence trimming needs at least 2 days of data");
    PriceMatrix out = m;
    if (eps == 0.0) return out;
    std::vector<double> col(m.rows());
    for (std::size_t c = 0; c < m.cols; ++c) {
        for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.at(r, c);
        std::sort(col.begin(), col.end());
        const double lo = quantile_sorted(col, eps / 2.0);
        const double hi = quantile_sorted(col, 1.0 - eps / 2.0);
        for (std::size_t r = 0; r < m.rows(); ++r)
            out.at(r, c) = std::min(std::max(out.at(r, c), lo), hi);
    }
    return out;
}

}  // namespace chargebid
