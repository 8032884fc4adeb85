#pragma once

#include <string>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/lp.hpp"
#include "chargebid/scenario.hpp"
#include "chargebid/station.hpp"

// Deterministic-equivalent model of the two-auction bidding problem: hourly
// day-ahead and quarter-hourly intraday demand curves plus the station schedule
// in every scenario, as one LP. Doubles as the ground-truth oracle and as the
// source of the stage problems used by the decomposition.
//
// Conventions, used consistently everywhere:
//  - prices arrive in EUR/MWh and are scaled by 1/1000 to EUR/kWh in objectives;
//  - all flow variables are per-quarter amounts (kWh or kg per 15 min);
//  - curve volumes sit on a fixed price grid and clear by linear interpolation
//    between the two bracketing steps;
//  - storage binaries are dropped: charge/discharge (inject/withdraw) pairs are
//    continuous, which provably does not change the optimum for an efficiency
//    strictly below 1 (simultaneous charge+discharge wastes money).

namespace chargebid {

struct MarketGrids {
    PriceGrid da;  // for hourly day-ahead curves
    PriceGrid id;  // for quarter-hourly intraday curves
};

struct BuildOptions {
    bool relaxed_load = true;  // serve-at-least instead of serve-exactly; keeps every
                               // day-ahead position feasible (excess can be dumped)
    bool uniform_da = true;    // deliver the cleared hourly volume in equal quarters
};

/// Per-leaf station schedule, one entry per quarter.
struct Schedule {
    std::vector<double> m_i;  // intraday purchase, kWh
    std::vector<double> v_e;  // electricity to charging service, kWh
    std::vector<double> b_c, b_d, b_l;  // battery charge/discharge/level, kWh
    std::vector<double> e_p;  // electrolyzer input, kWh
    std::vector<double> v_h;  // hydrogen to service, kg
    std::vector<double> h_c, h_d, h_l;  // tank inject/withdraw/level, kg
};

/// Column kinds of the per-leaf, per-quarter block (order fixed).
enum LeafVar { kMI = 0, kVE, kBC, kBD, kBL, kEP, kVH, kHC, kHD, kHL, kLeafVarCount };

struct ExtensiveModel {
    LpProblem lp;

    int hours = 0, quarters = 0, n_da = 0, n_leaves = 0;
    int i_da = 0, i_id = 0;               // grid step counts
    std::vector<int> n_id;                // intraday scenarios per day-ahead scenario
    std::vector<int> leaf_base;           // first leaf index per day-ahead scenario
    std::vector<double> leaf_prob;        // joint probability per leaf

    int rho_d_base = 0, m_d_base = 0, rho_i_base = 0, leaf_col_base = 0;

    // Column accessors.
    int rho_d(int i, int h) const { return rho_d_base + h * i_da + i; }
    int m_d(int t, int a) const { return m_d_base + a * quarters + t; }
    int rho_i(int i, int t, int a) const { return rho_i_base + (a * quarters + t) * i_id + i; }
    int leaf_var(int leaf, int t, LeafVar k) const {
        return leaf_col_base + (leaf * quarters + t) * kLeafVarCount + k;
    }
    int leaf_of(int a, int b) const { return leaf_base[a] + b; }

    // Row bookkeeping for dual lookups and diagnostics.
    std::vector<int> da_clear_rows;              // (a * hours + h)
    std::vector<int> id_clear_rows;              // (leaf * quarters + t)
    std::vector<int> balance_rows;               // (leaf * quarters + t)
    std::vector<int> cov_e_rows, cov_h_rows;     // (leaf * quarters + t)

    int da_clear_row(int h, int a) const { return da_clear_rows[a * hours + h]; }
    int balance_row(int t, int leaf) const { return balance_rows[leaf * quarters + t]; }
};

namespace detail {

/// Adds interpolation coefficients of a curve cleared at `price` to `coef`:
/// the cleared volume is sum_i c_i * rho(i) over the bracketing pair.
inline void add_clearing_coefs(std::vector<std::pair<int, double>>& coef, const PriceGrid& grid,
                               double price, int first_col, int stride,
                               const std::string& what) {
    if (!grid.contains(price))
        throw InputError("scenario price " + std::to_string(price) + " EUR/MWh lies outside the " +
                         what + " bid grid [" + std::to_string(grid.lo()) + ", " +
                         std::to_string(grid.hi()) + "]; widen the grid");
    const std::size_t i = grid_segment(grid, price);
    const double y0 = grid.steps[i], y1 = grid.steps[i + 1];
    coef.push_back({first_col + static_cast<int>(i) * stride, (y1 - price) / (y1 - y0)});
    coef.push_back({first_col + static_cast<int>(i + 1) * stride, (price - y0) / (y1 - y0)});
}

}  // namespace detail

inline ExtensiveModel build_extensive(const StationSpec& spec, const LoadProfile& loads,
                                      const ScenarioTree& tree, const MarketGrids& grids,
                                      const BuildOptions& opts = {}) {
    spec.validate();
    loads.validate();
    tree.validate();
    grids.da.validate();
    grids.id.validate();
    if (loads.quarters() != tree.quarters())
        throw InputError("load profile and scenario tree horizon lengths differ");

    ExtensiveModel em;
    em.hours = static_cast<int>(tree.hours());
    em.quarters = static_cast<int>(tree.quarters());
    em.n_da = static_cast<int>(tree.n_da());
    em.i_da = static_cast<int>(grids.da.size());
    em.i_id = static_cast<int>(grids.id.size());
    for (int a = 0; a < em.n_da; ++a) {
        em.leaf_base.push_back(em.n_leaves);
        em.n_id.push_back(static_cast<int>(tree.n_id(a)));
        em.n_leaves += em.n_id.back();
        for (int b = 0; b < em.n_id.back(); ++b) em.leaf_prob.push_back(tree.joint_prob(a, b));
    }

    LpProblem& lp = em.lp;

    // Largest volume the station can absorb, per quarter and per hour; used as
    // harmless caps on curve volumes so unused grid steps cannot drift.
    std::vector<double> q_cap(em.quarters), h_cap(em.hours, 0.0);
    for (int t = 0; t < em.quarters; ++t) {
        q_cap[t] = loads.electricity_kwh[t] + spec.b_charge_step_kwh() + spec.e_step_max_kwh();
        h_cap[t / 4] += q_cap[t];
    }

    em.rho_d_base = lp.n_cols();
    for (int h = 0; h < em.hours; ++h)
        for (int i = 0; i < em.i_da; ++i) lp.add_col(0.0, h_cap[h], 0.0);

    em.m_d_base = lp.n_cols();
    for (int a = 0; a < em.n_da; ++a) {
        const double pi_a = tree.da.probabilities[a];
        for (int t = 0; t < em.quarters; ++t) {
            const double price_kwh = tree.da.scenarios[a][t / 4] / 1000.0;
            lp.add_col(0.0, h_cap[t / 4], -pi_a * price_kwh);
        }
    }

    em.rho_i_base = lp.n_cols();
    for (int a = 0; a < em.n_da; ++a)
        for (int t = 0; t < em.quarters; ++t)
            for (int i = 0; i < em.i_id; ++i) lp.add_col(0.0, q_cap[t], 0.0);

    em.leaf_col_base = lp.n_cols();
    for (int a = 0; a < em.n_da; ++a) {
        for (int b = 0; b < em.n_id[a]; ++b) {
            const double pi = tree.joint_prob(a, b);
            for (int t = 0; t < em.quarters; ++t) {
                const double id_price_kwh = tree.id[a].scenarios[b][t] / 1000.0;
                lp.add_col(0.0, kInf, -pi * id_price_kwh);                  // m_i
                lp.add_col(0.0, kInf, 0.0);                                 // v_e
                lp.add_col(0.0, spec.b_charge_step_kwh(), 0.0);             // b_c
                lp.add_col(0.0, spec.b_discharge_step_kwh(), 0.0);          // b_d
                lp.add_col(0.0, spec.b_level_max_kwh, 0.0);                 // b_l
                lp.add_col(0.0, spec.e_step_max_kwh(), 0.0);                // e_p
                lp.add_col(0.0, kInf, 0.0);                                 // v_h
                lp.add_col(0.0, spec.h_inject_step_kg(), 0.0);              // h_c
                lp.add_col(0.0, spec.h_withdraw_step_kg(), 0.0);            // h_d
                lp.add_col(0.0, spec.h_level_max_kg, 0.0);                  // h_l
            }
        }
    }

    // Revenue is fixed because loads are always served in full.
    for (int t = 0; t < em.quarters; ++t)
        lp.offset += loads.electricity_kwh[t] * spec.lambda_e_eur_kwh +
                     loads.hydrogen_kg[t] * spec.lambda_h_eur_kg;

    // Legal bid curves are non-increasing in price. These rows also couple the
    // scenarios that clear the same curve: a scenario with a lower price can never
    // receive less volume than one with a higher price.
    for (int h = 0; h < em.hours; ++h)
        for (int i = 0; i + 1 < em.i_da; ++i)
            lp.add_row({{em.rho_d(i + 1, h), 1.0}, {em.rho_d(i, h), -1.0}}, Relation::LE, 0.0);
    for (int a = 0; a < em.n_da; ++a)
        for (int t = 0; t < em.quarters; ++t)
            for (int i = 0; i + 1 < em.i_id; ++i)
                lp.add_row({{em.rho_i(i + 1, t, a), 1.0}, {em.rho_i(i, t, a), -1.0}},
                           Relation::LE, 0.0);

    // Day-ahead clearing: curve value at the scenario price equals the hourly
    // delivered volume, split across the four quarters.
    for (int a = 0; a < em.n_da; ++a) {
        for (int h = 0; h < em.hours; ++h) {
            std::vector<std::pair<int, double>> coef;
            detail::add_clearing_coefs(coef, grids.da, tree.da.scenarios[a][h],
                                       em.rho_d(0, h), 1, "day-ahead");
            for (int t = 4 * h; t < 4 * h + 4; ++t) coef.push_back({em.m_d(t, a), -1.0});
            em.da_clear_rows.push_back(lp.add_row(std::move(coef), Relation::EQ, 0.0));
        }
        if (opts.uniform_da) {
            for (int t = 0; t < em.quarters; ++t) {
                if (t % 4 == 0) continue;
                lp.add_row({{em.m_d(t, a), 1.0}, {em.m_d(4 * (t / 4), a), -1.0}}, Relation::EQ, 0.0);
            }
        }
    }

    // Intraday clearing, per leaf and quarter, against the per-scenario curve of
    // the parent day-ahead scenario.
    for (int a = 0; a < em.n_da; ++a) {
        for (int b = 0; b < em.n_id[a]; ++b) {
            const int leaf = em.leaf_of(a, b);
            for (int t = 0; t < em.quarters; ++t) {
                std::vector<std::pair<int, double>> coef;
                detail::add_clearing_coefs(coef, grids.id, tree.id[a].scenarios[b][t],
                                           em.rho_i(0, t, a), 1, "intraday");
                coef.push_back({em.leaf_var(leaf, t, kMI), -1.0});
                em.id_clear_rows.push_back(lp.add_row(std::move(coef), Relation::EQ, 0.0));
            }
        }
    }

    const Relation cover = opts.relaxed_load ? Relation::GE : Relation::EQ;
    for (int leaf = 0, a = 0; a < em.n_da; ++a) {
        for (int b = 0; b < em.n_id[a]; ++b, ++leaf) {
            for (int t = 0; t < em.quarters; ++t) {
                auto v = [&](LeafVar k) { return em.leaf_var(leaf, t, k); };

                // Power balance: everything bought this quarter is used this quarter.
                em.balance_rows.push_back(lp.add_row({{v(kVE), 1.0},
                                                      {v(kBC), 1.0},
                                                      {v(kEP), 1.0},
                                                      {em.m_d(t, a), -1.0},
                                                      {v(kMI), -1.0}},
                                                     Relation::EQ, 0.0));

                // Storage recursions with charge/discharge efficiency losses.
                {
                    std::vector<std::pair<int, double>> coef{{v(kBL), 1.0},
                                                             {v(kBC), -spec.eta_b},
                                                             {v(kBD), 1.0 / spec.eta_b}};
                    double rhs = 0.0;
                    if (t == 0) rhs = spec.b_init_kwh;
                    else coef.push_back({em.leaf_var(leaf, t - 1, kBL), -1.0});
                    lp.add_row(std::move(coef), Relation::EQ, rhs);
                }
                {
                    std::vector<std::pair<int, double>> coef{{v(kHL), 1.0},
                                                             {v(kHC), -spec.eta_h},
                                                             {v(kHD), 1.0 / spec.eta_h}};
                    double rhs = 0.0;
                    if (t == 0) rhs = spec.h_init_kg;
                    else coef.push_back({em.leaf_var(leaf, t - 1, kHL), -1.0});
                    lp.add_row(std::move(coef), Relation::EQ, rhs);
                }

                // Electrolyzer conversion: electric input becomes hydrogen.
                lp.add_row({{v(kEP), spec.eta_e / spec.hv_kwh_per_kg},
                            {v(kHC), -1.0},
                            {v(kVH), -1.0}},
                           Relation::EQ, 0.0);

                // Customer loads are always met; the relaxed form may over-serve.
                em.cov_e_rows.push_back(lp.add_row({{v(kVE), 1.0}, {v(kBD), 1.0}}, cover,
                                                   loads.electricity_kwh[t]));
                em.cov_h_rows.push_back(lp.add_row({{v(kVH), 1.0}, {v(kHD), 1.0}}, cover,
                                                   loads.hydrogen_kg[t]));
            }
        }
    }

    return em;
}

/// Bid curves recovered from a solved model.
struct PolicyCurves {
    std::vector<BidCurve> da;               // per hour
    std::vector<std::vector<BidCurve>> id;  // [day-ahead scenario][quarter]
};

inline PolicyCurves extract_curves(const ExtensiveModel& em, const std::vector<double>& x,
                                   const MarketGrids& grids) {
    PolicyCurves pc;
    for (int h = 0; h < em.hours; ++h) {
        BidCurve c;
        c.grid = grids.da;
        for (int i = 0; i < em.i_da; ++i) c.volumes.push_back(x[em.rho_d(i, h)]);
        pc.da.push_back(std::move(c));
    }
    pc.id.resize(em.n_da);
    for (int a = 0; a < em.n_da; ++a) {
        for (int t = 0; t < em.quarters; ++t) {
            BidCurve c;
            c.grid = grids.id;
            for (int i = 0; i < em.i_id; ++i) c.volumes.push_back(x[em.rho_i(i, t, a)]);
            pc.id[a].push_back(std::move(c));
        }
    }
    return pc;
}

inline std::vector<std::vector<double>> extract_da_volumes(const ExtensiveModel& em,
                                                           const std::vector<double>& x) {
    std::vector<std::vector<double>> md(em.n_da, std::vector<double>(em.quarters, 0.0));
    for (int a = 0; a < em.n_da; ++a)
        for (int t = 0; t < em.quarters; ++t) md[a][t] = x[em.m_d(t, a)];
    return md;
}

inline std::vector<Schedule> extract_schedules(const ExtensiveModel& em,
                                               const std::vector<double>& x) {
    std::vector<Schedule> out(em.n_leaves);
    for (int leaf = 0; leaf < em.n_leaves; ++leaf) {
        Schedule& s = out[leaf];
        for (int t = 0; t < em.quarters; ++t) {
            s.m_i.push_back(x[em.leaf_var(leaf, t, kMI)]);
            s.v_e.push_back(x[em.leaf_var(leaf, t, kVE)]);
            s.b_c.push_back(x[em.leaf_var(leaf, t, kBC)]);
            s.b_d.push_back(x[em.leaf_var(leaf, t, kBD)]);
            s.b_l.push_back(x[em.leaf_var(leaf, t, kBL)]);
            s.e_p.push_back(x[em.leaf_var(leaf, t, kEP)]);
            s.v_h.push_back(x[em.leaf_var(leaf, t, kVH)]);
            s.h_c.push_back(x[em.leaf_var(leaf, t, kHC)]);
            s.h_d.push_back(x[em.leaf_var(leaf, t, kHD)]);
            s.h_l.push_back(x[em.leaf_var(leaf, t, kHL)]);
        }
    }
    return out;
}

/// Barest sanity check that the loads can be met at all from the market caps;
/// catches impossible inputs before they surface as infeasible LPs.
inline void check_load_serviceable(const StationSpec& spec, const LoadProfile& loads) {
    const double vh_cap = spec.eta_e * spec.e_step_max_kwh() / spec.hv_kwh_per_kg;
    for (std::size_t t = 0; t < loads.quarters(); ++t) {
        if (loads.hydrogen_kg[t] > vh_cap + spec.h_withdraw_step_kg() + 1e-9)
            throw InputError("hydrogen load in quarter " + std::to_string(t) +
                             " exceeds electrolyzer plus tank withdrawal capacity");
    }
}

}  // namespace chargebid
