#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/mip.hpp"
#include "chargebid/model.hpp"
#include "chargebid/rng.hpp"

// Ground-truth path: solve the deterministic equivalent directly. Deliberately
// guarded by a size budget -- the extensive LP grows as leaves x quarters and is
// only meant to validate the decomposition on desk-sized instances.

namespace chargebid {

struct OracleOptions {
    long max_size = 2500;  // budget on leaves * quarters * max grid steps
    bool force = false;    // run anyway
    SimplexOptions lp;
};

struct OracleResult {
    ExtensiveModel model;
    LpSolution solution;
    double objective = 0.0;
    long size_measure = 0;
};

inline long oracle_size(const ScenarioTree& tree, const MarketGrids& grids) {
    return static_cast<long>(tree.n_leaves()) * static_cast<long>(tree.quarters()) *
           static_cast<long>(std::max(grids.da.size(), grids.id.size()));
}

inline OracleResult solve_extensive(const StationSpec& spec, const LoadProfile& loads,
                                    const ScenarioTree& tree, const MarketGrids& grids,
                                    const OracleOptions& opts = {},
                                    const BuildOptions& build = {}) {
    OracleResult res;
    res.size_measure = oracle_size(tree, grids);
    if (!opts.force && res.size_measure > opts.max_size)
        throw InputError("extensive model size " + std::to_string(res.size_measure) +
                         " exceeds the oracle budget " + std::to_string(opts.max_size) +
                         "; shrink the instance or force the run");
    res.model = build_extensive(spec, loads, tree, grids, build);
    res.solution = solve_lp(res.model.lp, opts.lp);
    if (res.solution.status != LpStatus::Optimal)
        throw InternalError(std::string("extensive model not optimal: ") +
                            to_string(res.solution.status));
    res.objective = res.solution.objective;
    return res;
}

/// Outcome of checking that the continuous relaxation of the storage dynamics is
/// exact: no simultaneous charge+discharge (or inject+withdraw) in the LP optimum,
/// and the LP optimum matches the optimum of the variant with explicit mutual-
/// exclusion binaries.
struct ExclusivityCheck {
    double max_battery_product = 0.0;  // max over (leaf, quarter) of b_c * b_d
    double max_tank_product = 0.0;     // max over (leaf, quarter) of h_c * h_d
    double lp_objective = 0.0;
    double mip_objective = 0.0;
    double relative_gap = 0.0;
    long mip_nodes = 0;
    bool ok = false;
};

/// Adds binaries u with  b_c <= cap*u  and  b_d <= cap*(1-u)  (same for the tank)
/// and compares objectives. The products and the gap should both vanish whenever
/// efficiencies are strictly below one.
inline ExclusivityCheck verify_storage_exclusivity(const StationSpec& spec,
                                                   const LoadProfile& loads,
                                                   const ScenarioTree& tree,
                                                   const MarketGrids& grids,
                                                   const OracleOptions& opts = {},
                                                   double product_tol = 1e-6,
                                                   double gap_tol = 1e-6) {
    ExclusivityCheck chk;
    OracleResult lp = solve_extensive(spec, loads, tree, grids, opts);
    chk.lp_objective = lp.objective;
    const ExtensiveModel& em = lp.model;
    for (int leaf = 0; leaf < em.n_leaves; ++leaf) {
        for (int t = 0; t < em.quarters; ++t) {
            chk.max_battery_product =
                std::max(chk.max_battery_product, lp.solution.x[em.leaf_var(leaf, t, kBC)] *
                                                      lp.solution.x[em.leaf_var(leaf, t, kBD)]);
            chk.max_tank_product =
                std::max(chk.max_tank_product, lp.solution.x[em.leaf_var(leaf, t, kHC)] *
                                                   lp.solution.x[em.leaf_var(leaf, t, kHD)]);
        }
    }

    LpProblem mip = em.lp;
    std::vector<int> binaries;
    for (int leaf = 0; leaf < em.n_leaves; ++leaf) {
        for (int t = 0; t < em.quarters; ++t) {
            const int ub = mip.add_col(0.0, 1.0, 0.0);
            mip.add_row({{em.leaf_var(leaf, t, kBC), 1.0}, {ub, -spec.b_charge_step_kwh()}},
                        Relation::LE, 0.0);
            mip.add_row({{em.leaf_var(leaf, t, kBD), 1.0}, {ub, spec.b_discharge_step_kwh()}},
                        Relation::LE, spec.b_discharge_step_kwh());
            binaries.push_back(ub);
            const int uh = mip.add_col(0.0, 1.0, 0.0);
            mip.add_row({{em.leaf_var(leaf, t, kHC), 1.0}, {uh, -spec.h_inject_step_kg()}},
                        Relation::LE, 0.0);
            mip.add_row({{em.leaf_var(leaf, t, kHD), 1.0}, {uh, spec.h_withdraw_step_kg()}},
                        Relation::LE, spec.h_withdraw_step_kg());
            binaries.push_back(uh);
        }
    }
    MipOptions mops;
    mops.lp = opts.lp;
    const MipResult mres = solve_mip(mip, binaries, mops);
    if (mres.status != LpStatus::Optimal)
        throw InternalError(std::string("exclusivity reference model not optimal: ") +
                            to_string(mres.status));
    chk.mip_objective = mres.objective;
    chk.mip_nodes = mres.nodes;
    chk.relative_gap = std::fabs(chk.lp_objective - chk.mip_objective) /
                       std::max(1.0, std::fabs(chk.lp_objective));
    chk.ok = chk.max_battery_product <= product_tol && chk.max_tank_product <= product_tol &&
             chk.relative_gap <= gap_tol;
    return chk;
}

struct RandomInstance {
    StationSpec spec;
    LoadProfile loads;
    ScenarioTree tree;
    MarketGrids grids;
};

/// Small seeded instance for randomized verification: 1-2 hours, 1-2 scenarios per
/// level, efficiencies in [0.8, 0.95], loads well inside the serviceable range.
inline RandomInstance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    RandomInstance ri;
    ri.spec.eta_b = rng.uniform(0.8, 0.95);
    ri.spec.eta_h = rng.uniform(0.8, 0.95);
    ri.spec.eta_e = rng.uniform(0.8, 0.95);
    ri.spec.b_init_kwh = rng.uniform(0.0, 20.0);
    ri.spec.h_init_kg = rng.uniform(0.0, 3.0);

    const int hours = 1 + static_cast<int>(rng.bounded(2));
    const int quarters = 4 * hours;
    for (int t = 0; t < quarters; ++t) {
        ri.loads.electricity_kwh.push_back(rng.uniform(0.0, 5.0));
        ri.loads.hydrogen_kg.push_back(rng.uniform(0.0, 0.5));
    }

    const int n_da = 1 + static_cast<int>(rng.bounded(2));
    const int n_id = 1 + static_cast<int>(rng.bounded(2));
    ScenarioSet da, id;
    std::vector<double> all_da, all_id;
    double wsum = 0.0;
    for (int a = 0; a < n_da; ++a) {
        std::vector<double> s;
        for (int h = 0; h < hours; ++h) s.push_back(rng.uniform(30.0, 200.0));
        all_da.insert(all_da.end(), s.begin(), s.end());
        da.scenarios.push_back(std::move(s));
        da.probabilities.push_back(0.2 + rng.uniform());
        wsum += da.probabilities.back();
    }
    for (double& p : da.probabilities) p /= wsum;
    wsum = 0.0;
    for (int b = 0; b < n_id; ++b) {
        std::vector<double> s;
        for (int t = 0; t < quarters; ++t) s.push_back(rng.uniform(20.0, 220.0));
        all_id.insert(all_id.end(), s.begin(), s.end());
        id.scenarios.push_back(std::move(s));
        id.probabilities.push_back(0.2 + rng.uniform());
        wsum += id.probabilities.back();
    }
    for (double& p : id.probabilities) p /= wsum;

    ri.tree = build_tree(da, id);
    ri.grids.da = grid_covering(all_da, 3);
    ri.grids.id = grid_covering(all_id, 3);
    return ri;
}

}  // namespace chargebid
