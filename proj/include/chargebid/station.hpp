#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chargebid/errors.hpp"

// Physical description of the charging station (battery, electrolyzer, hydrogen
// tank, customer loads) and the piecewise-linear bid curve primitives shared by
// the optimization model and the market-clearing simulation.

namespace chargebid {

/// Quarter-hour market-time-unit length in hours.
constexpr double kQuarterHours = 0.25;

/// Station parameters. Rates are per hour (kW, kg/h); levels are absolute (kWh, kg).
/// Defaults describe the bundled reference station.
struct StationSpec {
    double eta_b = 0.85;  // battery charge/discharge efficiency
    double eta_h = 0.9;   // tank inject/withdraw efficiency
    double eta_e = 0.8;   // electrolyzer conversion efficiency
    double hv_kwh_per_kg = 39.4;  // energy content of hydrogen

    double b_level_max_kwh = 60.0;
    double b_charge_max_kw = 15.0;
    double b_discharge_max_kw = 15.0;
    double h_level_max_kg = 20.0;
    double h_inject_max_kg_h = 5.0;
    double h_withdraw_max_kg_h = 5.0;
    double e_power_max_kw = 1000.0;  // electrolyzer electric input cap

    double b_init_kwh = 0.0;
    double h_init_kg = 0.0;

    double lambda_e_eur_kwh = 0.3;  // retail electricity tariff
    double lambda_h_eur_kg = 12.0;  // retail hydrogen price

    // Per-quarter energy/mass limits implied by the hourly rate caps.
    double b_charge_step_kwh() const { return b_charge_max_kw * kQuarterHours; }
    double b_discharge_step_kwh() const { return b_discharge_max_kw * kQuarterHours; }
    double h_inject_step_kg() const { return h_inject_max_kg_h * kQuarterHours; }
    double h_withdraw_step_kg() const { return h_withdraw_max_kg_h * kQuarterHours; }
    double e_step_max_kwh() const { return e_power_max_kw * kQuarterHours; }

    void validate() const {
        auto in01 = [](double x) { return x > 0.0 && x <= 1.0; };
        if (!in01(eta_b) || !in01(eta_h) || !in01(eta_e))
            throw InputError("efficiencies must be in (0, 1]");
        if (hv_kwh_per_kg <= 0) throw InputError("hydrogen energy content must be positive");
        if (b_level_max_kwh < 0 || b_charge_max_kw < 0 || b_discharge_max_kw < 0 ||
            h_level_max_kg < 0 || h_inject_max_kg_h < 0 || h_withdraw_max_kg_h < 0 ||
            e_power_max_kw < 0)
            throw InputError("capacities must be nonnegative");
        if (b_init_kwh < 0 || b_init_kwh > b_level_max_kwh)
            throw InputError("initial battery level outside [0, max]");
        if (h_init_kg < 0 || h_init_kg > h_level_max_kg)
            throw InputError("initial tank level outside [0, max]");
        if (lambda_e_eur_kwh < 0 || lambda_h_eur_kg < 0)
            throw InputError("retail prices must be nonnegative");
    }
};

/// Customer demand per quarter-hour: electricity in kWh, hydrogen in kg.
struct LoadProfile {
    std::vector<double> electricity_kwh;
    std::vector<double> hydrogen_kg;

    std::size_t quarters() const { return electricity_kwh.size(); }

    void validate() const {
        if (electricity_kwh.size() != hydrogen_kg.size())
            throw InputError("electricity and hydrogen load profiles differ in length");
        if (electricity_kwh.empty()) throw InputError("load profile is empty");
        if (electricity_kwh.size() % 4 != 0)
            throw InputError("load profile length must be a whole number of hours");
        for (double v : electricity_kwh)
            if (v < 0) throw InputError("negative electricity load");
        for (double v : hydrogen_kg)
            if (v < 0) throw InputError("negative hydrogen load");
    }
};

/// Fixed, strictly increasing price steps (EUR/MWh) on which bid volumes are placed.
struct PriceGrid {
    std::vector<double> steps;

    std::size_t size() const { return steps.size(); }
    double lo() const { return steps.front(); }
    double hi() const { return steps.back(); }

    void validate() const {
        if (steps.size() < 2) throw InputError("price grid needs at least 2 steps");
        for (std::size_t i = 1; i < steps.size(); ++i)
            if (!(steps[i] > steps[i - 1])) throw InputError("price grid steps must be strictly increasing");
    }

    bool contains(double price) const { return price >= lo() && price <= hi(); }
};

inline PriceGrid make_price_grid(double lo, double hi, std::size_t n_steps) {
    if (n_steps < 2) throw InputError("price grid needs at least 2 steps");
    if (!(hi > lo)) throw InputError("price grid needs hi > lo");
    PriceGrid g;
    g.steps.resize(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i)
        g.steps[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_steps - 1);
    g.steps.back() = hi;  // exact endpoint
    return g;
}

/// Grid spanning the given scenario prices; a degenerate span is widened so the
/// steps remain strictly increasing.
inline PriceGrid grid_covering(const std::vector<double>& prices, std::size_t n_steps) {
    if (prices.empty()) throw InputError("cannot build a price grid from no prices");
    double lo = prices[0], hi = prices[0];
    for (double p : prices) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (!(hi > lo)) {
        const double pad = std::max(1.0, 0.01 * std::fabs(lo));
        lo -= pad;
        hi += pad;
    }
    return make_price_grid(lo, hi, n_steps);
}

/// One hour's (or quarter's) bid: volumes at each grid step. A legal buy-side demand
/// curve is non-increasing in price.
struct BidCurve {
    PriceGrid grid;
    std::vector<double> volumes;  // kWh at each grid step

    void validate() const {
        grid.validate();
        if (volumes.size() != grid.size()) throw InputError("bid curve width must match the grid");
        for (std::size_t i = 1; i < volumes.size(); ++i)
            if (volumes[i] > volumes[i - 1] + 1e-9)
                throw InputError("bid curve volumes must be non-increasing in price");
    }
};

/// Index of the grid segment [steps[i], steps[i+1]] containing the price; the lowest
/// matching segment when the price hits an interior step. Throws on out-of-grid prices.
inline std::size_t grid_segment(const PriceGrid& g, double price) {
    if (!g.contains(price))
        throw InputError("price " + std::to_string(price) + " outside the bid grid [" +
                         std::to_string(g.lo()) + ", " + std::to_string(g.hi()) + "]");
    const auto it = std::lower_bound(g.steps.begin(), g.steps.end(), price);
    const std::size_t i = static_cast<std::size_t>(it - g.steps.begin());
    return i == 0 ? 0 : i - 1;  // interior steps resolve to the segment below them
}

/// Cleared volume at a price between grid steps: linear interpolation between the
/// bracketing step volumes.
inline double interpolate_volume(const BidCurve& curve, double price) {
    const PriceGrid& g = curve.grid;
    const std::size_t i = grid_segment(g, price);
    const double y0 = g.steps[i], y1 = g.steps[i + 1];
    return ((price - y0) * curve.volumes[i + 1] + (y1 - price) * curve.volumes[i]) / (y1 - y0);
}

}  // namespace chargebid
