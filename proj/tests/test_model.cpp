#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chargebid/model.hpp"

using namespace chargebid;

namespace {

// One-hour horizon helpers: a single day-ahead price and per-quarter intraday prices.
ScenarioTree tiny_tree(std::vector<double> da_price_per_hour,
                       std::vector<std::vector<double>> id_scenarios,
                       std::vector<double> id_probs) {
    ScenarioSet da{{std::move(da_price_per_hour)}, {1.0}};
    ScenarioSet id{std::move(id_scenarios), std::move(id_probs)};
    return build_tree(da, id);
}

LoadProfile flat_loads(double e_kwh, double h_kg, std::size_t quarters = 4) {
    LoadProfile lp;
    lp.electricity_kwh.assign(quarters, e_kwh);
    lp.hydrogen_kg.assign(quarters, h_kg);
    return lp;
}

MarketGrids grids_around(double da_lo, double da_hi, double id_lo, double id_hi) {
    return {make_price_grid(da_lo, da_hi, 3), make_price_grid(id_lo, id_hi, 3)};
}

double solve_profit(const ExtensiveModel& em) {
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    return s.objective;
}

}  // namespace

TEST_CASE("deterministic day-ahead procurement at the cheaper auction") {
    // Load 1 kWh/quarter at retail 0.3; day-ahead 100 EUR/MWh beats intraday 200.
    // Revenue 4*0.3 = 1.2, cost 4*0.1 = 0.4, profit 0.8.
    const ScenarioTree tree = tiny_tree({100.0}, {{200, 200, 200, 200}}, {1.0});
    const ExtensiveModel em =
        build_extensive(StationSpec{}, flat_loads(1.0, 0.0), tree, grids_around(50, 150, 150, 250));
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(0.8, 1e-8));
    const auto md = extract_da_volumes(em, s.x);
    for (int t = 0; t < 4; ++t) REQUIRE_THAT(md[0][t], Catch::Matchers::WithinAbs(1.0, 1e-8));
    const auto sched = extract_schedules(em, s.x);
    for (int t = 0; t < 4; ++t) {
        REQUIRE_THAT(sched[0].m_i[t], Catch::Matchers::WithinAbs(0.0, 1e-8));
        REQUIRE_THAT(sched[0].v_e[t], Catch::Matchers::WithinAbs(1.0, 1e-8));
    }
}

TEST_CASE("initial battery energy displaces purchases at discharge efficiency") {
    // 2 kWh of stored energy delivers 2*0.85 = 1.7 kWh, saving 1.7*0.1 EUR.
    const ScenarioTree tree = tiny_tree({100.0}, {{200, 200, 200, 200}}, {1.0});
    StationSpec spec;
    spec.b_init_kwh = 2.0;
    const ExtensiveModel em =
        build_extensive(spec, flat_loads(1.0, 0.0), tree, grids_around(50, 150, 150, 250));
    REQUIRE_THAT(solve_profit(em), Catch::Matchers::WithinAbs(0.97, 1e-8));
}

TEST_CASE("battery shifts cheap intraday energy into expensive quarters") {
    // Intraday 40 then 240 EUR/MWh; serving the late quarters through the battery
    // costs 0.04/eta^2 = 0.0554 per kWh, beating both markets. Final profit:
    // 1.2 - 0.04*(2 + 2/0.85^2).
    const ScenarioTree tree = tiny_tree({100.0}, {{40, 40, 240, 240}}, {1.0});
    const ExtensiveModel em =
        build_extensive(StationSpec{}, flat_loads(1.0, 0.0), tree, grids_around(50, 150, 40, 240));
    const double expected = 1.2 - 0.04 * (2.0 + 2.0 / (0.85 * 0.85));
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(expected, 1e-8));
    // The day-ahead auction is not used at these prices.
    const auto md = extract_da_volumes(em, s.x);
    for (int t = 0; t < 4; ++t) REQUIRE_THAT(md[0][t], Catch::Matchers::WithinAbs(0.0, 1e-8));
    // Battery levels respect the recursion within the schedule.
    const auto sched = extract_schedules(em, s.x);
    double level = 0.0;
    for (int t = 0; t < 4; ++t) {
        level += 0.85 * sched[0].b_c[t] - sched[0].b_d[t] / 0.85;
        REQUIRE_THAT(sched[0].b_l[t], Catch::Matchers::WithinAbs(level, 1e-7));
    }
}

TEST_CASE("hydrogen demand is served through the electrolyzer") {
    // 0.2 kg in the last quarter needs 0.2*39.4/0.8 = 9.85 kWh bought day-ahead.
    // Quarter-wise day-ahead delivery (uniform off) keeps the arithmetic exact:
    // revenue 1.2 + 12*0.2 = 3.6, cost 0.1*(4 + 9.85), profit 2.215.
    ScenarioTree tree = tiny_tree({100.0}, {{200, 200, 200, 200}}, {1.0});
    LoadProfile loads = flat_loads(1.0, 0.0);
    loads.hydrogen_kg[3] = 0.2;
    BuildOptions opts;
    opts.uniform_da = false;
    const ExtensiveModel em =
        build_extensive(StationSpec{}, loads, tree, grids_around(50, 150, 150, 250), opts);
    REQUIRE_THAT(solve_profit(em), Catch::Matchers::WithinAbs(3.6 - 0.1 * 13.85, 1e-8));
}

TEST_CASE("cheap intraday prices leave the day-ahead curve at zero") {
    const ScenarioTree tree = tiny_tree({100.0}, {{60, 60, 60, 60}}, {1.0});
    const ExtensiveModel em =
        build_extensive(StationSpec{}, flat_loads(1.0, 0.0), tree, grids_around(50, 150, 40, 80));
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(1.2 - 4 * 0.06, 1e-8));
    const PolicyCurves pc = extract_curves(em, s.x, grids_around(50, 150, 40, 80));
    REQUIRE_THAT(interpolate_volume(pc.da[0], 100.0), Catch::Matchers::WithinAbs(0.0, 1e-8));
    for (int t = 0; t < 4; ++t)
        REQUIRE_THAT(interpolate_volume(pc.id[0][t], 60.0), Catch::Matchers::WithinAbs(1.0, 1e-8));
}

TEST_CASE("recourse against mixed intraday outcomes still prefers day-ahead") {
    // Expected intraday cost 0.5*0.06 + 0.5*0.2 = 0.13/kWh exceeds 0.1 day-ahead.
    const ScenarioTree tree =
        tiny_tree({100.0}, {{60, 60, 60, 60}, {200, 200, 200, 200}}, {0.5, 0.5});
    const MarketGrids g = grids_around(50, 150, 40, 220);
    const ExtensiveModel em = build_extensive(StationSpec{}, flat_loads(1.0, 0.0), tree, g);
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(0.8, 1e-8));
    // Extracted curves are legal (non-increasing) even at unused grid steps.
    const PolicyCurves pc = extract_curves(em, s.x, g);
    for (const auto& c : pc.da) c.validate();
    for (const auto& fam : pc.id)
        for (const auto& c : fam) c.validate();
    REQUIRE(pc.id[0].size() == 4);
}

TEST_CASE("scenario prices outside the grid are rejected with advice") {
    const ScenarioTree tree = tiny_tree({300.0}, {{200, 200, 200, 200}}, {1.0});
    try {
        build_extensive(StationSpec{}, flat_loads(1.0, 0.0), tree, grids_around(50, 150, 150, 250));
        FAIL("expected an input error");
    } catch (const InputError& e) {
        REQUIRE(std::string(e.what()).find("widen the grid") != std::string::npos);
    }
}

TEST_CASE("uniform delivery ties the four quarters of each hour") {
    // With time-varying loads inside the hour the uniform rule forces equal
    // quarter deliveries; intraday tops up the difference.
    ScenarioTree tree = tiny_tree({100.0}, {{120, 120, 120, 120}}, {1.0});
    LoadProfile loads = flat_loads(1.0, 0.0);
    loads.electricity_kwh = {2.0, 0.0, 2.0, 0.0};
    const ExtensiveModel em =
        build_extensive(StationSpec{}, loads, tree, grids_around(50, 150, 80, 160));
    const LpSolution s = solve_lp(em.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    const auto md = extract_da_volumes(em, s.x);
    REQUIRE_THAT(md[0][1], Catch::Matchers::WithinAbs(md[0][0], 1e-9));
    REQUIRE_THAT(md[0][2], Catch::Matchers::WithinAbs(md[0][0], 1e-9));
    REQUIRE_THAT(md[0][3], Catch::Matchers::WithinAbs(md[0][0], 1e-9));
}

TEST_CASE("impossible hydrogen loads are caught before the solve") {
    StationSpec spec;
    LoadProfile loads = flat_loads(1.0, 0.0);
    loads.hydrogen_kg[2] = 1e5;
    REQUIRE_THROWS_AS(check_load_serviceable(spec, loads), InputError);
    loads.hydrogen_kg[2] = 1.0;
    check_load_serviceable(spec, loads);
}
