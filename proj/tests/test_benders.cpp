#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chargebid/benders.hpp"
#include "chargebid/model.hpp"

using namespace chargebid;

namespace {

LoadProfile flat_loads(double e_kwh, double h_kg, std::size_t quarters) {
    LoadProfile lp;
    lp.electricity_kwh.assign(quarters, e_kwh);
    lp.hydrogen_kg.assign(quarters, h_kg);
    return lp;
}

// One-hour, one-scenario fixture: the smallest instance exercising the full loop.
struct SingleLeafCase {
    StationSpec spec;
    LoadProfile loads = flat_loads(1.0, 0.0, 4);
    ScenarioTree tree;
    MarketGrids grids{make_price_grid(50, 150, 3), make_price_grid(40, 240, 3)};

    SingleLeafCase() {
        ScenarioSet da{{{100.0}}, {1.0}};
        ScenarioSet id{{{40, 40, 240, 240}}, {1.0}};
        tree = build_tree(da, id);
    }
};

double extensive_objective(const StationSpec& spec, const LoadProfile& loads,
                           const ScenarioTree& tree, const MarketGrids& grids) {
    const ExtensiveModel em = build_extensive(spec, loads, tree, grids);
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    return s.objective;
}

BendersOptions tight_options() {
    BendersOptions o;
    o.eps = 1e-9;
    o.sddp.stages = 2;
    o.sddp.eps = 1e-9;
    return o;
}

}  // namespace

TEST_CASE("single-leaf instance converges to the extensive optimum within five iterations") {
    SingleLeafCase c;
    const BendersResult r = solve_benders(c.spec, c.loads, c.tree, c.grids, tight_options());
    REQUIRE(r.converged);
    REQUIRE(r.iterations <= 5);
    const double ref = extensive_objective(c.spec, c.loads, c.tree, c.grids);
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(ref, 1e-6));
    REQUIRE(r.upper_bound - r.lower_bound <= 1e-6 * std::max(1.0, std::fabs(r.upper_bound)));
    REQUIRE_FALSE(r.negative_price_warning);
}

TEST_CASE("bounds are ordered and the upper bound never increases") {
    SingleLeafCase c;
    BendersOptions o = tight_options();
    const BendersResult r = solve_benders(c.spec, c.loads, c.tree, c.grids, o);
    REQUIRE_FALSE(r.trace.empty());
    double prev_ub = kInf;
    for (const auto& row : r.trace) {
        const double scale = std::max(1.0, std::fabs(row.upper));
        REQUIRE(row.upper <= prev_ub + 1e-9 * scale);
        REQUIRE(row.upper >= row.lower - 1e-7 * scale);
        REQUIRE_THAT(row.gap, Catch::Matchers::WithinAbs(row.upper - row.lower, 1e-12));
        prev_ub = row.upper;
    }
    REQUIRE(r.trace.back().iteration == r.iterations);
}

TEST_CASE("two scenario groups with two leaves each match the extensive oracle") {
    // 2 hours / 8 quarters, 2 DA x 2 ID: the desk-scale shape. The decomposed
    // objective must agree with the monolithic LP at a tight gap.
    StationSpec spec;
    const LoadProfile loads = flat_loads(1.5, 0.02, 8);
    ScenarioTree tree;
    tree.da = {{{80.0, 120.0}, {140.0, 60.0}}, {0.55, 0.45}};
    tree.id.resize(2);
    tree.id[0] = {{{70, 90, 110, 95, 130, 150, 120, 105}, {55, 65, 85, 75, 100, 115, 90, 80}},
                  {0.6, 0.4}};
    tree.id[1] = {{{150, 160, 140, 130, 70, 60, 80, 90}, {120, 130, 110, 100, 50, 45, 65, 75}},
                  {0.3, 0.7}};
    tree.validate();
    const MarketGrids grids{make_price_grid(40, 180, 3), make_price_grid(30, 180, 3)};

    BendersOptions o = tight_options();
    o.max_iters = 80;
    const BendersResult r = solve_benders(spec, loads, tree, grids, o);
    REQUIRE(r.converged);
    const double ref = extensive_objective(spec, loads, tree, grids);
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(ref, 1e-6 * std::max(1.0, std::fabs(ref))));

    // Artifacts carry the full policy: legal curves and one schedule per leaf.
    REQUIRE(r.curves.da.size() == 2);
    for (const auto& cdab : r.curves.da) cdab.validate();
    REQUIRE(r.curves.id.size() == 2);
    for (const auto& group : r.curves.id) {
        REQUIRE(group.size() == 8);
        for (const auto& cq : group) cq.validate();
    }
    REQUIRE(r.m_d.size() == 2);
    REQUIRE(r.m_d[0].size() == 8);
    REQUIRE(r.schedules.size() == 4);
    for (const auto& sc : r.schedules) REQUIRE(sc.m_i.size() == 8);
}

TEST_CASE("cleared day-ahead volumes replay from the curve and the scenario price") {
    SingleLeafCase c;
    const BendersResult r = solve_benders(c.spec, c.loads, c.tree, c.grids, tight_options());
    for (std::size_t h = 0; h < r.curves.da.size(); ++h) {
        const double cleared = interpolate_volume(r.curves.da[h], c.tree.da.scenarios[0][h]);
        for (int k = 0; k < 4; ++k) {
            const double quarter = r.m_d[0][4 * h + k];
            REQUIRE_THAT(quarter, Catch::Matchers::WithinAbs(cleared / 4.0, 1e-7));
        }
    }
}

TEST_CASE("negative intraday prices raise the warning and still converge") {
    StationSpec spec;
    const LoadProfile loads = flat_loads(1.0, 0.0, 4);
    ScenarioSet da{{{100.0}}, {1.0}};
    ScenarioSet id{{{-30, 40, 210, 240}}, {1.0}};
    const ScenarioTree tree = build_tree(da, id);
    const MarketGrids grids{make_price_grid(50, 150, 3), make_price_grid(-30, 240, 3)};

    const BendersResult r = solve_benders(spec, loads, tree, grids, tight_options());
    REQUIRE(r.negative_price_warning);
    REQUIRE(r.converged);
    const double ref = extensive_objective(spec, loads, tree, grids);
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(ref, 1e-6 * std::max(1.0, std::fabs(ref))));
}

TEST_CASE("repeated runs are bit-identical") {
    SingleLeafCase c;
    const BendersResult a = solve_benders(c.spec, c.loads, c.tree, c.grids, tight_options());
    const BendersResult b = solve_benders(c.spec, c.loads, c.tree, c.grids, tight_options());
    REQUIRE(a.iterations == b.iterations);
    REQUIRE(a.objective == b.objective);
    REQUIRE(a.upper_bound == b.upper_bound);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        REQUIRE(a.trace[i].upper == b.trace[i].upper);
        REQUIRE(a.trace[i].lower == b.trace[i].lower);
    }
    for (std::size_t aidx = 0; aidx < a.m_d.size(); ++aidx)
        for (std::size_t t = 0; t < a.m_d[aidx].size(); ++t)
            REQUIRE(a.m_d[aidx][t] == b.m_d[aidx][t]);
}

TEST_CASE("mismatched horizon lengths are rejected") {
    SingleLeafCase c;
    const LoadProfile bad = flat_loads(1.0, 0.0, 8);
    REQUIRE_THROWS_AS(solve_benders(c.spec, bad, c.tree, c.grids, tight_options()), InputError);
}

TEST_CASE("initial storage duals aggregate to the displacement value") {
    // Flat expensive intraday prices: one extra stored kWh delivers eta_b kWh worth
    // 0.2 each, so the dual is 0.85 * 0.2 = 0.17 regardless of the scenario.
    StationSpec spec;
    const LoadProfile loads = flat_loads(1.0, 0.0, 4);
    ScenarioSet da{{{250.0}}, {1.0}};
    ScenarioSet id{{{200, 200, 200, 200}}, {1.0}};
    const ScenarioTree tree = build_tree(da, id);
    const MarketGrids grids{make_price_grid(150, 350, 3), make_price_grid(150, 250, 3)};
    const BendersResult r = solve_benders(spec, loads, tree, grids, tight_options());
    REQUIRE(r.converged);
    REQUIRE_THAT(r.init_b_dual, Catch::Matchers::WithinAbs(0.85 * 0.2, 1e-6));
}
