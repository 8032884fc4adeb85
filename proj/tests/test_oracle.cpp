#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chargebid/oracle.hpp"

using namespace chargebid;

namespace {

// Battery-arbitrage instance with a known optimum: cheap early quarters feed the
// battery, expensive late quarters drain it.
struct ArbCase {
    StationSpec spec;
    LoadProfile loads;
    ScenarioTree tree;
    MarketGrids grids{make_price_grid(50, 150, 3), make_price_grid(40, 240, 3)};

    ArbCase() {
        loads.electricity_kwh.assign(4, 1.0);
        loads.hydrogen_kg.assign(4, 0.0);
        ScenarioSet da{{{100.0}}, {1.0}};
        ScenarioSet id{{{40, 40, 240, 240}}, {1.0}};
        tree = build_tree(da, id);
    }
};

}  // namespace

TEST_CASE("size measure counts leaves, quarters and the wider grid") {
    ScenarioTree tree;
    tree.da = {{{80.0, 120.0}, {140.0, 60.0}}, {0.5, 0.5}};
    ScenarioSet id{{{70, 90, 110, 95, 130, 150, 120, 105}}, {1.0}};
    tree.id = {id, id};
    tree.validate();
    const MarketGrids grids{make_price_grid(40, 180, 3), make_price_grid(30, 180, 5)};
    REQUIRE(oracle_size(tree, grids) == 2L * 8L * 5L);
}

TEST_CASE("budget guard rejects oversized instances unless forced") {
    ArbCase c;
    OracleOptions o;
    o.max_size = 10;  // instance measures 1 * 4 * 3 = 12
    REQUIRE(oracle_size(c.tree, c.grids) == 12);
    REQUIRE_THROWS_AS(solve_extensive(c.spec, c.loads, c.tree, c.grids, o), InputError);
    o.force = true;
    const OracleResult r = solve_extensive(c.spec, c.loads, c.tree, c.grids, o);
    const double expected = 1.2 - 0.04 * (2.0 + 2.0 / (0.85 * 0.85));
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(expected, 1e-8));
}

TEST_CASE("storage exclusivity holds on the arbitrage instance") {
    ArbCase c;
    const ExclusivityCheck chk = verify_storage_exclusivity(c.spec, c.loads, c.tree, c.grids);
    REQUIRE(chk.ok);
    REQUIRE(chk.max_battery_product <= 1e-6);
    REQUIRE(chk.max_tank_product <= 1e-6);
    REQUIRE(chk.relative_gap <= 1e-6);
    REQUIRE(chk.mip_nodes >= 1);
    REQUIRE_THAT(chk.lp_objective, Catch::Matchers::WithinAbs(chk.mip_objective, 1e-6));
}

TEST_CASE("random instances are deterministic in the seed and well formed") {
    const RandomInstance a = random_instance(7);
    const RandomInstance b = random_instance(7);
    REQUIRE(a.spec.eta_b == b.spec.eta_b);
    REQUIRE(a.tree.da.scenarios == b.tree.da.scenarios);
    REQUIRE(a.loads.electricity_kwh == b.loads.electricity_kwh);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RandomInstance ri = random_instance(seed);
        REQUIRE(ri.spec.eta_b >= 0.8);
        REQUIRE(ri.spec.eta_b <= 0.95);
        REQUIRE(ri.spec.eta_h >= 0.8);
        REQUIRE(ri.spec.eta_h <= 0.95);
        ri.spec.validate();
        ri.loads.validate();
        ri.tree.validate();
        ri.grids.da.validate();
        ri.grids.id.validate();
        REQUIRE(ri.loads.quarters() == ri.tree.quarters());
    }
}

TEST_CASE("exclusivity survives twenty seeded random instances") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        INFO("seed " << seed);
        const RandomInstance ri = random_instance(seed);
        const ExclusivityCheck chk =
            verify_storage_exclusivity(ri.spec, ri.loads, ri.tree, ri.grids);
        REQUIRE(chk.max_battery_product <= 1e-6);
        REQUIRE(chk.max_tank_product <= 1e-6);
        REQUIRE(chk.relative_gap <= 1e-6);
        REQUIRE(chk.ok);
    }
}
