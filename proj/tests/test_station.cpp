#include <catch2/catch_amalgamated.hpp>

#include "chargebid/station.hpp"

using namespace chargebid;

TEST_CASE("default station matches the reference hardware") {
    const StationSpec s;
    s.validate();
    REQUIRE(s.eta_b == 0.85);
    REQUIRE(s.eta_h == 0.9);
    REQUIRE(s.eta_e == 0.8);
    REQUIRE(s.hv_kwh_per_kg == 39.4);
    REQUIRE(s.b_level_max_kwh == 60.0);
    REQUIRE(s.h_level_max_kg == 20.0);
    REQUIRE(s.e_power_max_kw == 1000.0);
    REQUIRE(s.lambda_e_eur_kwh == 0.3);
    REQUIRE(s.lambda_h_eur_kg == 12.0);
}

TEST_CASE("per-quarter steps derive from hourly rate caps") {
    const StationSpec s;
    REQUIRE_THAT(s.b_charge_step_kwh(), Catch::Matchers::WithinAbs(3.75, 1e-12));
    REQUIRE_THAT(s.b_discharge_step_kwh(), Catch::Matchers::WithinAbs(3.75, 1e-12));
    REQUIRE_THAT(s.h_inject_step_kg(), Catch::Matchers::WithinAbs(1.25, 1e-12));
    REQUIRE_THAT(s.h_withdraw_step_kg(), Catch::Matchers::WithinAbs(1.25, 1e-12));
    REQUIRE_THAT(s.e_step_max_kwh(), Catch::Matchers::WithinAbs(250.0, 1e-12));
}

TEST_CASE("invalid stations are rejected") {
    StationSpec s;
    s.eta_b = 0.0;
    REQUIRE_THROWS_AS(s.validate(), InputError);
    s = StationSpec{};
    s.b_init_kwh = 61.0;
    REQUIRE_THROWS_AS(s.validate(), InputError);
    s = StationSpec{};
    s.h_init_kg = -1.0;
    REQUIRE_THROWS_AS(s.validate(), InputError);
    s = StationSpec{};
    s.lambda_h_eur_kg = -2.0;
    REQUIRE_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("load profiles must align on whole hours") {
    LoadProfile lp;
    lp.electricity_kwh = {1, 2, 3, 4};
    lp.hydrogen_kg = {0.1, 0.2, 0.3, 0.4};
    lp.validate();
    REQUIRE(lp.quarters() == 4);
    lp.electricity_kwh.push_back(5);
    REQUIRE_THROWS_AS(lp.validate(), InputError);  // lengths differ
    lp.hydrogen_kg.push_back(0.5);
    REQUIRE_THROWS_AS(lp.validate(), InputError);  // 5 quarters is not a whole hour
}

TEST_CASE("uniform grids hit both endpoints") {
    const PriceGrid g = make_price_grid(10.0, 90.0, 5);
    REQUIRE(g.steps == std::vector<double>{10, 30, 50, 70, 90});
    REQUIRE(g.contains(10.0));
    REQUIRE(g.contains(90.0));
    REQUIRE(!g.contains(90.0001));
    REQUIRE_THROWS_AS(make_price_grid(5.0, 5.0, 3), InputError);
    REQUIRE_THROWS_AS(make_price_grid(0.0, 1.0, 1), InputError);
}

TEST_CASE("covering grid spans the observed prices") {
    const PriceGrid g = grid_covering({42.0, 17.0, 99.0}, 4);
    REQUIRE(g.lo() == 17.0);
    REQUIRE(g.hi() == 99.0);
    REQUIRE(g.size() == 4);
    // All-equal prices get a symmetric pad so the grid stays non-degenerate.
    const PriceGrid flat = grid_covering({50.0, 50.0}, 3);
    REQUIRE(flat.lo() < 50.0);
    REQUIRE(flat.hi() > 50.0);
    REQUIRE(flat.contains(50.0));
}

TEST_CASE("bid curves must not increase with price") {
    BidCurve c;
    c.grid = make_price_grid(0.0, 200.0, 3);
    c.volumes = {20.0, 10.0, 6.0};
    c.validate();
    c.volumes = {20.0, 21.0, 6.0};
    REQUIRE_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("interpolated clearing follows the curve") {
    // Grid {0,100,200} with volumes {20,10,6}.
    BidCurve c;
    c.grid = make_price_grid(0.0, 200.0, 3);
    c.volumes = {20.0, 10.0, 6.0};
    REQUIRE_THAT(interpolate_volume(c, 0.0), Catch::Matchers::WithinAbs(20.0, 1e-12));
    REQUIRE_THAT(interpolate_volume(c, 50.0), Catch::Matchers::WithinAbs(15.0, 1e-12));
    REQUIRE_THAT(interpolate_volume(c, 100.0), Catch::Matchers::WithinAbs(10.0, 1e-12));
    REQUIRE_THAT(interpolate_volume(c, 150.0), Catch::Matchers::WithinAbs(8.0, 1e-12));
    REQUIRE_THAT(interpolate_volume(c, 200.0), Catch::Matchers::WithinAbs(6.0, 1e-12));
    REQUIRE_THROWS_AS(interpolate_volume(c, 250.0), InputError);
    REQUIRE_THROWS_AS(interpolate_volume(c, -1.0), InputError);
}

TEST_CASE("interior grid points belong to the lower segment") {
    const PriceGrid g = make_price_grid(0.0, 200.0, 3);
    REQUIRE(grid_segment(g, 100.0) == 0);
    REQUIRE(grid_segment(g, 100.0001) == 1);
    REQUIRE(grid_segment(g, 0.0) == 0);
    REQUIRE(grid_segment(g, 200.0) == 1);  // top step clears on the last segment
}
