#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chargebid/benders.hpp"
#include "chargebid/evaluate.hpp"

using namespace chargebid;

namespace {

LoadProfile flat_loads(double e_kwh, double h_kg, std::size_t quarters) {
    LoadProfile lp;
    lp.electricity_kwh.assign(quarters, e_kwh);
    lp.hydrogen_kg.assign(quarters, h_kg);
    return lp;
}

// Solves a one-hour instance and packs the result for evaluation.
PolicyBundle solved_bundle(const ScenarioTree& tree, const MarketGrids& grids) {
    PolicyBundle pb;
    pb.spec = StationSpec{};
    pb.loads = flat_loads(1.0, 0.0, tree.quarters());
    pb.tree = tree;
    BendersOptions o;
    o.eps = 1e-9;
    o.sddp.stages = 2;
    o.sddp.eps = 1e-9;
    const BendersResult r = solve_benders(pb.spec, pb.loads, tree, grids, o);
    REQUIRE(r.converged);
    pb.curves = r.curves;
    pb.m_d = r.m_d;
    pb.schedules = r.schedules;
    pb.in_sample_objective = r.objective;
    return pb;
}

PolicyBundle arbitrage_bundle() {
    ScenarioSet da{{{100.0}}, {1.0}};
    ScenarioSet id{{{40, 40, 240, 240}}, {1.0}};
    return solved_bundle(build_tree(da, id),
                         {make_price_grid(50, 150, 3), make_price_grid(40, 240, 3)});
}

}  // namespace

TEST_CASE("normal sampler is deterministic per index and matches the fitted moments") {
    PriceMatrix da(2), id(2);
    da.append_row({10.0, 20.0});
    da.append_row({14.0, 24.0});
    id.append_row({100.0, 50.0});
    id.append_row({110.0, 70.0});
    const NormalSampler s(da, id, 42);

    std::vector<double> a1, b1, a2, b2;
    s.draw(5, a1, b1);
    s.draw(5, a2, b2);
    REQUIRE(a1 == a2);
    REQUIRE(b1 == b2);
    s.draw(6, a2, b2);
    REQUIRE(a1 != a2);

    const int n = 20000;
    double mean0 = 0.0, mean1 = 0.0, var0 = 0.0;
    for (int i = 0; i < n; ++i) {
        s.draw(static_cast<std::uint64_t>(i), a1, b1);
        mean0 += a1[0];
        mean1 += b1[1];
        var0 += (a1[0] - 12.0) * (a1[0] - 12.0);
    }
    mean0 /= n;
    mean1 /= n;
    var0 /= n;
    // Column moments: da col 0 has mu 12, sd sqrt(8); id col 1 has mu 60.
    REQUIRE_THAT(mean0, Catch::Matchers::WithinAbs(12.0, 0.1));
    REQUIRE_THAT(mean1, Catch::Matchers::WithinAbs(60.0, 0.5));
    REQUIRE_THAT(var0, Catch::Matchers::WithinAbs(8.0, 0.3));
}

TEST_CASE("sampler fitting requires at least two days") {
    PriceMatrix one(2), two(2);
    one.append_row({10.0, 20.0});
    two.append_row({10.0, 20.0});
    two.append_row({12.0, 22.0});
    REQUIRE_THROWS_AS(NormalSampler(one, two, 1), InputError);
    REQUIRE_THROWS_AS(NormalSampler(two, one, 1), InputError);
}

TEST_CASE("nearest scenario attribution breaks ties toward the lowest index") {
    ScenarioTree tree;
    tree.da = {{{100.0}, {120.0}}, {0.5, 0.5}};
    ScenarioSet id{{{100, 100, 100, 100}}, {1.0}};
    tree.id = {id, id};
    tree.validate();
    REQUIRE(nearest_da_scenario(tree, {104.0}) == 0);
    REQUIRE(nearest_da_scenario(tree, {116.0}) == 1);
    REQUIRE(nearest_da_scenario(tree, {110.0}) == 0);
}

TEST_CASE("drawing the exact scenario prices reproduces the in-sample objective") {
    const PolicyBundle pb = arbitrage_bundle();
    const FixedSampler s({100.0}, {40, 40, 240, 240});
    McOptions o;
    o.draws = 3;
    const McReport rep = monte_carlo(pb, s, o);
    REQUIRE(rep.clipped_prices == 0);
    const double leaf = in_sample_leaf_profit(pb, 0, 0);
    for (double p : rep.profits) {
        REQUIRE_THAT(p, Catch::Matchers::WithinAbs(pb.in_sample_objective, 1e-9));
        REQUIRE_THAT(p, Catch::Matchers::WithinAbs(leaf, 1e-9));
    }
    REQUIRE_THAT(rep.mean, Catch::Matchers::WithinAbs(pb.in_sample_objective, 1e-9));
    REQUIRE(rep.variance <= 1e-18);
}

TEST_CASE("the identity holds per leaf in a two-scenario bundle") {
    ScenarioTree tree;
    tree.da = {{{80.0}, {140.0}}, {0.5, 0.5}};
    tree.id.resize(2);
    tree.id[0] = {{{70, 90, 110, 95}, {55, 65, 85, 75}}, {0.6, 0.4}};
    tree.id[1] = {{{150, 160, 140, 130}, {120, 130, 110, 100}}, {0.3, 0.7}};
    tree.validate();
    const PolicyBundle pb =
        solved_bundle(tree, {make_price_grid(60, 160, 3), make_price_grid(50, 170, 3)});

    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            const FixedSampler s(tree.da.scenarios[a], tree.id[a].scenarios[b]);
            McOptions o;
            o.draws = 1;
            const McReport rep = monte_carlo(pb, s, o);
            INFO("scenario " << a << " leaf " << b);
            REQUIRE_THAT(rep.profits[0],
                         Catch::Matchers::WithinAbs(in_sample_leaf_profit(pb, a, b), 1e-9));
        }
    }
}

TEST_CASE("out-of-grid prices are clipped and counted") {
    const PolicyBundle pb = arbitrage_bundle();
    // Day-ahead 500 clips to 150; intraday 300 clips to 240 in all four quarters.
    const FixedSampler s({500.0}, {300, 300, 300, 300});
    McOptions o;
    o.draws = 2;
    const McReport rep = monte_carlo(pb, s, o);
    REQUIRE(rep.clipped_prices == 2 * 5);

    const FixedSampler edge({150.0}, {240, 240, 240, 240});
    const McReport rep2 = monte_carlo(pb, edge, o);
    REQUIRE(rep2.clipped_prices == 0);
    REQUIRE_THAT(rep.profits[0], Catch::Matchers::WithinAbs(rep2.profits[0], 1e-9));
}

TEST_CASE("replay assumes full service while re-optimization earns only served load") {
    const PolicyBundle pb = arbitrage_bundle();
    // At 240 EUR/MWh everywhere the curves clear next to nothing, so the station
    // cannot serve the full load; replay still credits it.
    const FixedSampler s({100.0}, {240, 240, 240, 240});
    McOptions o;
    o.draws = 1;
    o.replay = false;
    const McReport reopt = monte_carlo(pb, s, o);
    o.replay = true;
    const McReport replay = monte_carlo(pb, s, o);
    REQUIRE(replay.profits[0] > reopt.profits[0] + 0.01);

    // Replay profit is the closed-form repricing of the cleared volumes.
    double expected = 4 * 1.0 * pb.spec.lambda_e_eur_kwh;
    expected -= interpolate_volume(pb.curves.da[0], 100.0) * 100.0 / 1000.0;
    for (std::size_t t = 0; t < 4; ++t)
        expected -= interpolate_volume(pb.curves.id[0][t], 240.0) * 240.0 / 1000.0;
    REQUIRE_THAT(replay.profits[0], Catch::Matchers::WithinAbs(expected, 1e-9));
}

TEST_CASE("thread count does not change the drawn profits") {
    const PolicyBundle pb = arbitrage_bundle();
    PriceMatrix da(1), id(4);
    da.append_row({90.0});
    da.append_row({110.0});
    id.append_row({45, 50, 200, 230});
    id.append_row({55, 60, 220, 210});
    const NormalSampler s(da, id, 9);
    McOptions o;
    o.draws = 50;
    o.threads = 1;
    const McReport one = monte_carlo(pb, s, o);
    o.threads = 4;
    const McReport four = monte_carlo(pb, s, o);
    REQUIRE(one.profits == four.profits);
    REQUIRE(one.clipped_prices == four.clipped_prices);
    REQUIRE(one.mean == four.mean);
}

TEST_CASE("summary statistics are coherent") {
    const PolicyBundle pb = arbitrage_bundle();
    PriceMatrix da(1), id(4);
    da.append_row({90.0});
    da.append_row({110.0});
    id.append_row({45, 50, 200, 230});
    id.append_row({55, 60, 220, 210});
    const NormalSampler s(da, id, 3);
    McOptions o;
    o.draws = 200;
    o.histogram_bins = 10;
    const McReport rep = monte_carlo(pb, s, o);

    REQUIRE(rep.profits.size() == 200);
    REQUIRE(rep.variance >= 0.0);
    REQUIRE(rep.p5 <= rep.p25);
    REQUIRE(rep.p25 <= rep.p50);
    REQUIRE(rep.p50 <= rep.p75);
    REQUIRE(rep.p75 <= rep.p95);

    REQUIRE(rep.histogram.size() == 10);
    long total = 0;
    for (std::size_t b = 0; b < rep.histogram.size(); ++b) {
        total += rep.histogram[b].count;
        REQUIRE(rep.histogram[b].hi >= rep.histogram[b].lo);
        if (b > 0)
            REQUIRE_THAT(rep.histogram[b].lo,
                         Catch::Matchers::WithinAbs(rep.histogram[b - 1].hi, 1e-12));
    }
    REQUIRE(total == 200);

    double lo = kInf, hi = -kInf;
    for (double p : rep.profits) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    REQUIRE_THAT(rep.histogram.front().lo, Catch::Matchers::WithinAbs(lo, 1e-12));
    REQUIRE_THAT(rep.histogram.back().hi, Catch::Matchers::WithinAbs(hi, 1e-12));
}

TEST_CASE("bad options and malformed bundles are rejected") {
    const PolicyBundle pb = arbitrage_bundle();
    const FixedSampler s({100.0}, {40, 40, 240, 240});
    McOptions o;
    o.draws = 0;
    REQUIRE_THROWS_AS(monte_carlo(pb, s, o), InputError);

    PolicyBundle broken = pb;
    broken.curves.da.clear();
    o.draws = 1;
    REQUIRE_THROWS_AS(monte_carlo(broken, s, o), InputError);

    PolicyBundle bad_family = pb;
    bad_family.curves.id[0].pop_back();
    REQUIRE_THROWS_AS(monte_carlo(bad_family, s, o), InputError);
}
