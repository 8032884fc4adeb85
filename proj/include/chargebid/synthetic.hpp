#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "chargebid/market_data.hpp"
#include "chargebid/rng.hpp"
#include "chargebid/station.hpp"

// Seeded synthetic inputs: a plausible double-peaked daily price shape with
// day-level and interval-level noise, and a charging-demand profile with morning
// and evening rush hours. Used for self-contained runs and tests.

namespace chargebid {

struct SyntheticPriceOptions {
    int days = 60;
    double base = 100.0;       // EUR/MWh
    double daily_amp = 25.0;   // single-cycle swing
    double second_amp = 10.0;  // twin-peak component
    double day_sd = 5.0;       // day-to-day offset
    double noise_sd = 6.0;     // per-interval noise
    double floor = 1.0;        // keep prices positive
    std::uint64_t seed = 42;
};

inline PriceMatrix synthetic_prices(Market market, const SyntheticPriceOptions& o = {}) {
    const int n = intervals_per_day(market);
    PriceMatrix m(static_cast<std::size_t>(n));
    Rng rng(o.seed + (market == Market::DayAhead ? 0 : 1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int d = 0; d < o.days; ++d) {
        const double day_off = rng.normal(0.0, o.day_sd);
        std::vector<double> row(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double tau = (i + 0.5) / n;
            double p = o.base + day_off + o.daily_amp * std::sin(two_pi * (tau - 0.3)) +
                       o.second_amp * std::sin(2.0 * two_pi * (tau - 0.1)) +
                       rng.normal(0.0, o.noise_sd);
            row[static_cast<std::size_t>(i)] = std::max(o.floor, p);
        }
        m.append_row(row);
    }
    return m;
}

struct SyntheticLoadOptions {
    double ev_peak_kwh = 8.0;   // electricity per quarter at the rush-hour peak
    double ev_base_kwh = 1.0;
    double h2_peak_kg = 0.6;    // hydrogen per quarter at the peak
    double h2_base_kg = 0.05;
};

/// Deterministic twin-peak demand profile over a whole number of hours.
inline LoadProfile synthetic_loads(int quarters, const SyntheticLoadOptions& o = {}) {
    LoadProfile lp;
    auto bump = [](double tau, double center, double width) {
        const double d = (tau - center) / width;
        return std::exp(-0.5 * d * d);
    };
    for (int t = 0; t < quarters; ++t) {
        const double tau = (t + 0.5) / quarters;
        const double shape = bump(tau, 0.33, 0.08) + bump(tau, 0.75, 0.10);
        lp.electricity_kwh.push_back(o.ev_base_kwh + o.ev_peak_kwh * shape);
        lp.hydrogen_kg.push_back(o.h2_base_kg + o.h2_peak_kg * shape);
    }
    return lp;
}

}  // namespace chargebid
