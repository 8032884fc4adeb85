#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/lp.hpp"
#include "chargebid/model.hpp"
#include "chargebid/sddp.hpp"

// Outer decomposition: the master problem chooses the day-ahead bid curves (and
// the scenario-wise cleared volumes they imply) plus a scalar standing in for the
// expected intraday cost; each iteration solves every day-ahead scenario group's
// sub-problem by stagewise decomposition and returns one aggregated optimality
// cut. The master objective is a monotone upper bound on the achievable expected
// profit; the realized value of each candidate policy provides the lower bound.

namespace chargebid {

struct BendersOptions {
    int max_iters = 60;
    double eps = 1e-5;  // relative gap
    GroupSddpOptions sddp;
    SimplexOptions lp;
    bool collect_trace = true;
};

struct BendersIterRow {
    int iteration = 0;
    double upper = 0.0, lower = 0.0, gap = 0.0;
};

struct GroupTraceTagged {
    int benders_iteration = 0, group = 0;
    GroupTraceRow row;
};

struct BendersResult {
    bool converged = false;
    int iterations = 0;
    double upper_bound = 0.0;
    double lower_bound = 0.0;  // best realized policy value; the reported objective
    double objective = 0.0;

    PolicyCurves curves;                    // day-ahead per hour, intraday per (scenario, quarter)
    std::vector<std::vector<double>> m_d;   // cleared day-ahead volume per (scenario, quarter)
    std::vector<Schedule> schedules;        // per leaf, same enumeration as the tree
    double init_b_dual = 0.0, init_h_dual = 0.0;

    std::vector<BendersIterRow> trace;
    std::vector<GroupTraceTagged> sddp_trace;
    bool negative_price_warning = false;
};

namespace detail {

/// Master LP: day-ahead curve volumes, scenario-cleared volumes and the expected
/// intraday cost variable Z; optimality cuts arrive as extra rows.
struct Master {
    LpProblem lp;
    int hours = 0, quarters = 0, n_da = 0, i_da = 0;
    int rho_base = 0, m_d_base = 0, z_col = 0;

    int rho(int i, int h) const { return rho_base + h * i_da + i; }
    int m_d(int t, int a) const { return m_d_base + a * quarters + t; }
};

inline Master build_master(const StationSpec& spec, const LoadProfile& loads,
                           const ScenarioTree& tree, const MarketGrids& grids,
                           const BuildOptions& opts, double z_lower) {
    Master ms;
    ms.hours = static_cast<int>(tree.hours());
    ms.quarters = static_cast<int>(tree.quarters());
    ms.n_da = static_cast<int>(tree.n_da());
    ms.i_da = static_cast<int>(grids.da.size());
    LpProblem& lp = ms.lp;

    std::vector<double> h_cap(ms.hours, 0.0);
    for (int t = 0; t < ms.quarters; ++t)
        h_cap[t / 4] += loads.electricity_kwh[t] + spec.b_charge_step_kwh() + spec.e_step_max_kwh();

    ms.rho_base = lp.n_cols();
    for (int h = 0; h < ms.hours; ++h)
        for (int i = 0; i < ms.i_da; ++i) lp.add_col(0.0, h_cap[h], 0.0);
    ms.m_d_base = lp.n_cols();
    for (int a = 0; a < ms.n_da; ++a) {
        const double pi_a = tree.da.probabilities[a];
        for (int t = 0; t < ms.quarters; ++t)
            lp.add_col(0.0, h_cap[t / 4], -pi_a * tree.da.scenarios[a][t / 4] / 1000.0);
    }
    ms.z_col = lp.add_col(z_lower, kInf, -1.0);

    for (int t = 0; t < ms.quarters; ++t)
        lp.offset += loads.electricity_kwh[t] * spec.lambda_e_eur_kwh +
                     loads.hydrogen_kg[t] * spec.lambda_h_eur_kg;

    // Legal curves are non-increasing in price; this also couples the scenarios
    // cleared from the same curve.
    for (int h = 0; h < ms.hours; ++h)
        for (int i = 0; i + 1 < ms.i_da; ++i)
            lp.add_row({{ms.rho(i + 1, h), 1.0}, {ms.rho(i, h), -1.0}}, Relation::LE, 0.0);

    for (int a = 0; a < ms.n_da; ++a) {
        for (int h = 0; h < ms.hours; ++h) {
            std::vector<std::pair<int, double>> coef;
            add_clearing_coefs(coef, grids.da, tree.da.scenarios[a][h], ms.rho(0, h), 1,
                               "day-ahead");
            for (int t = 4 * h; t < 4 * h + 4; ++t) coef.push_back({ms.m_d(t, a), -1.0});
            lp.add_row(std::move(coef), Relation::EQ, 0.0);
        }
        if (opts.uniform_da) {
            for (int t = 0; t < ms.quarters; ++t) {
                if (t % 4 == 0) continue;
                lp.add_row({{ms.m_d(t, a), 1.0}, {ms.m_d(4 * (t / 4), a), -1.0}}, Relation::EQ,
                           0.0);
            }
        }
    }
    return ms;
}

}  // namespace detail

inline BendersResult solve_benders(const StationSpec& spec, const LoadProfile& loads,
                                   const ScenarioTree& tree, const MarketGrids& grids,
                                   const BendersOptions& opts = {}) {
    spec.validate();
    loads.validate();
    tree.validate();
    grids.da.validate();
    grids.id.validate();
    if (loads.quarters() != tree.quarters())
        throw InputError("load profile and scenario tree horizon lengths differ");

    BendersResult res;
    res.negative_price_warning = has_negative_prices(tree);

    const int quarters = static_cast<int>(tree.quarters());
    const int n_da = static_cast<int>(tree.n_da());

    // Z >= 0 is valid while intraday prices are nonnegative; otherwise the most
    // profitable conceivable intraday trade bounds the cost from below.
    double z_lower = 0.0;
    if (res.negative_price_warning) {
        for (int t = 0; t < quarters; ++t) {
            const double cap = loads.electricity_kwh[t] + spec.b_charge_step_kwh() +
                               spec.e_step_max_kwh();
            double min_p = 0.0;
            for (const auto& set : tree.id)
                for (const auto& s : set.scenarios) min_p = std::min(min_p, s[t]);
            z_lower -= cap * std::max(0.0, -min_p) / 1000.0;
        }
    }

    const BuildOptions bops;  // relaxed coverage, uniform delivery
    detail::Master ms = detail::build_master(spec, loads, tree, grids, bops, z_lower);

    double best_lb = -kInf;
    double ub = kInf;

    for (int it = 1; it <= opts.max_iters; ++it) {
        res.iterations = it;
        const LpSolution msol = solve_lp(ms.lp, opts.lp);
        if (msol.status != LpStatus::Optimal)
            throw InternalError(std::string("master problem not optimal: ") +
                                to_string(msol.status));
        ub = msol.objective;

        // Evaluate the candidate day-ahead position group by group.
        double first_stage = ms.lp.offset;
        std::vector<std::vector<double>> md(n_da, std::vector<double>(quarters, 0.0));
        for (int a = 0; a < n_da; ++a)
            for (int t = 0; t < quarters; ++t) {
                md[a][t] = msol.x[ms.m_d(t, a)];
                first_stage -=
                    tree.da.probabilities[a] * tree.da.scenarios[a][t / 4] / 1000.0 * md[a][t];
            }

        double expected_realized = 0.0;
        std::vector<GroupSddpResult> groups;
        for (int a = 0; a < n_da; ++a) {
            GroupInput gi;
            gi.spec = &spec;
            gi.loads = &loads;
            gi.id_grid = &grids.id;
            gi.leaf_prices = tree.id[a].scenarios;
            gi.leaf_prob = tree.id[a].probabilities;
            gi.m_d_fixed = md[a];
            GroupSddpOptions gops = opts.sddp;
            gops.seed = derive_seed(opts.sddp.seed, static_cast<std::uint64_t>(it) * 1000 + a);
            gops.collect_trace = opts.collect_trace;
            groups.push_back(run_group_sddp(gi, gops));
            expected_realized += tree.da.probabilities[a] * groups.back().realized_profit;
            if (opts.collect_trace)
                for (const auto& row : groups.back().trace)
                    res.sddp_trace.push_back({it, a, row});
        }

        const double lb = first_stage + expected_realized;
        if (lb > best_lb) {
            best_lb = lb;
            res.m_d = md;
            res.curves.da.clear();
            for (int h = 0; h < ms.hours; ++h) {
                BidCurve c;
                c.grid = grids.da;
                for (int i = 0; i < ms.i_da; ++i) c.volumes.push_back(msol.x[ms.rho(i, h)]);
                res.curves.da.push_back(std::move(c));
            }
            res.curves.id.assign(n_da, {});
            res.schedules.clear();
            res.init_b_dual = res.init_h_dual = 0.0;
            for (int a = 0; a < n_da; ++a) {
                res.curves.id[a] = groups[a].id_curves;
                for (auto& sc : groups[a].schedules) res.schedules.push_back(sc);
                res.init_b_dual += tree.da.probabilities[a] * groups[a].init_b_dual;
                res.init_h_dual += tree.da.probabilities[a] * groups[a].init_h_dual;
            }
        }

        const double gap = ub - best_lb;
        if (opts.collect_trace) res.trace.push_back({it, ub, best_lb, gap});
        if (gap <= opts.eps * std::max(1.0, std::fabs(ub))) {
            res.converged = true;
            break;
        }

        // One aggregated optimality cut:
        //   Z >= sum_a pi_a [ -bound_a + g_a.(md_a - m_d(., a)) ]
        std::vector<std::pair<int, double>> coef{{ms.z_col, 1.0}};
        double rhs = 0.0;
        for (int a = 0; a < n_da; ++a) {
            const double pi_a = tree.da.probabilities[a];
            rhs -= pi_a * groups[a].bound_profit;
            for (int t = 0; t < quarters; ++t) {
                const double g = groups[a].md_slopes[t];
                rhs += pi_a * g * md[a][t];
                coef.push_back({ms.m_d(t, a), pi_a * g});
            }
        }
        ms.lp.add_row(std::move(coef), Relation::GE, rhs);
    }

    res.upper_bound = ub;
    res.lower_bound = best_lb;
    res.objective = best_lb;
    return res;
}

}  // namespace chargebid
