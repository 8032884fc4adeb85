#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chargebid/lp.hpp"
#include "chargebid/rng.hpp"

using namespace chargebid;

namespace {

// max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x,y >= 0.
// Corners: (4,0) -> 12, (3,1) -> 11, (0,2) -> 4. Optimum (4,0), duals (3,0).
LpProblem two_var() {
    LpProblem p;
    p.add_col(0.0, kInf, 3.0);
    p.add_col(0.0, kInf, 2.0);
    p.add_row({{0, 1.0}, {1, 1.0}}, Relation::LE, 4.0);
    p.add_row({{0, 1.0}, {1, 3.0}}, Relation::LE, 6.0);
    return p;
}

}  // namespace

TEST_CASE("two-variable maximum with hand-checked corner") {
    const LpSolution s = solve_lp(two_var());
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(12.0, 1e-9));
    REQUIRE_THAT(s.x[0], Catch::Matchers::WithinAbs(4.0, 1e-9));
    REQUIRE_THAT(s.x[1], Catch::Matchers::WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(s.duals[0], Catch::Matchers::WithinAbs(3.0, 1e-9));
    REQUIRE_THAT(s.duals[1], Catch::Matchers::WithinAbs(0.0, 1e-9));
    REQUIRE(s.max_residual < 1e-9);
    REQUIRE(s.dual_gap < 1e-9);
}

TEST_CASE("duals price marginal capacity") {
    // Raising the first rhs by delta should raise the optimum by 3*delta.
    LpProblem p = two_var();
    p.rows[0].rhs = 4.1;
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(12.3, 1e-9));
}

TEST_CASE("equality row with upper bounds") {
    // max x1 + 2x2  s.t.  x1 + x2 = 10,  x1 <= 6, x2 <= 7  ->  x2 = 7, x1 = 3, obj 17.
    LpProblem p;
    p.add_col(0.0, 6.0, 1.0);
    p.add_col(0.0, 7.0, 2.0);
    p.add_row({{0, 1.0}, {1, 1.0}}, Relation::EQ, 10.0);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(17.0, 1e-9));
    REQUIRE_THAT(s.x[0], Catch::Matchers::WithinAbs(3.0, 1e-9));
    REQUIRE_THAT(s.x[1], Catch::Matchers::WithinAbs(7.0, 1e-9));
}

TEST_CASE("greater-equal rows carry nonpositive duals under maximization") {
    // max -x  s.t.  x >= 3  ->  x = 3, objective -3, dual -1.
    LpProblem p;
    p.add_col(0.0, kInf, -1.0);
    p.add_row({{0, 1.0}}, Relation::GE, 3.0);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(-3.0, 1e-9));
    REQUIRE_THAT(s.duals[0], Catch::Matchers::WithinAbs(-1.0, 1e-9));
    REQUIRE(s.duals[0] <= 1e-12);
}

TEST_CASE("contradictory rows are reported infeasible") {
    LpProblem p;
    p.add_col(0.0, kInf, 1.0);
    p.add_row({{0, 1.0}}, Relation::GE, 2.0);
    p.add_row({{0, 1.0}}, Relation::LE, 1.0);
    REQUIRE(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("missing upper bound with positive cost is unbounded") {
    LpProblem p;
    p.add_col(0.0, kInf, 1.0);
    REQUIRE(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("negative lower bounds and the constant offset") {
    LpProblem p;
    p.offset = 100.0;
    p.add_col(-5.0, 2.0, 1.0);
    p.add_col(-5.0, 2.0, -1.0);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(100.0 + 2.0 + 5.0, 1e-9));
    REQUIRE_THAT(s.x[1], Catch::Matchers::WithinAbs(-5.0, 1e-9));
}

TEST_CASE("degenerate vertex still terminates") {
    LpProblem p;
    p.add_col(0.0, kInf, 1.0);
    p.add_col(0.0, kInf, 1.0);
    p.add_row({{0, 1.0}}, Relation::LE, 1.0);
    p.add_row({{1, 1.0}}, Relation::LE, 1.0);
    p.add_row({{0, 1.0}, {1, 1.0}}, Relation::LE, 2.0);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(2.0, 1e-9));
}

TEST_CASE("iteration cap reports the limit status") {
    LpProblem p;
    for (int i = 0; i < 6; ++i) p.add_col(0.0, kInf, 1.0 + 0.1 * i);
    for (int r = 0; r < 6; ++r) {
        std::vector<std::pair<int, double>> coefs;
        for (int i = 0; i <= r; ++i) coefs.push_back({i, 1.0});
        p.add_row(coefs, Relation::LE, 1.0 + r);
    }
    SimplexOptions o;
    o.max_iters = 1;
    REQUIRE(solve_lp(p, o).status == LpStatus::IterLimit);
}

TEST_CASE("warm start from a perturbed problem stays optimal") {
    LpProblem p = two_var();
    LpSolution s0 = solve_lp(p);
    REQUIRE(s0.basis.reusable);
    p.rows[0].rhs = 5.0;
    const LpSolution s1 = solve_lp(p, {}, &s0.basis);
    REQUIRE(s1.status == LpStatus::Optimal);
    REQUIRE_THAT(s1.objective, Catch::Matchers::WithinAbs(15.0, 1e-9));
}

TEST_CASE("random bounded problems satisfy optimality diagnostics") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(6));
        const int m = 1 + static_cast<int>(rng.bounded(5));
        LpProblem p;
        for (int j = 0; j < n; ++j) p.add_col(0.0, rng.uniform(1.0, 10.0), rng.uniform(-5.0, 5.0));
        for (int r = 0; r < m; ++r) {
            std::vector<std::pair<int, double>> coefs;
            for (int j = 0; j < n; ++j)
                if (rng.uniform() < 0.7) coefs.push_back({j, rng.uniform(0.1, 3.0)});
            if (coefs.empty()) coefs.push_back({0, 1.0});
            p.add_row(coefs, Relation::LE, rng.uniform(1.0, 20.0));
        }
        const LpSolution s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);  // x = 0 feasible, box keeps it bounded
        REQUIRE(s.max_residual < 1e-7);
        REQUIRE(s.dual_gap < 1e-6 * std::max(1.0, std::fabs(s.objective)));
        for (int j = 0; j < n; ++j) {
            REQUIRE(s.x[j] >= p.lo[j] - 1e-9);
            REQUIRE(s.x[j] <= p.up[j] + 1e-9);
        }
    }
}

TEST_CASE("random problems with equalities keep primal and dual consistency") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + static_cast<int>(rng.bounded(5));
        LpProblem p;
        std::vector<double> x0;
        for (int j = 0; j < n; ++j) {
            p.add_col(0.0, 10.0, rng.uniform(-2.0, 2.0));
            x0.push_back(rng.uniform(0.5, 5.0));  // interior point used to build feasible rhs
        }
        const int m = 1 + static_cast<int>(rng.bounded(3));
        for (int r = 0; r < m; ++r) {
            std::vector<std::pair<int, double>> coefs;
            double lhs = 0.0;
            for (int j = 0; j < n; ++j)
                if (rng.uniform() < 0.6) {
                    const double a = rng.uniform(-1.0, 2.0);
                    coefs.push_back({j, a});
                    lhs += a * x0[j];
                }
            if (coefs.empty()) continue;
            p.add_row(coefs, Relation::EQ, lhs);
        }
        const LpSolution s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);
        REQUIRE(s.max_residual < 1e-6);
        REQUIRE(s.dual_gap < 1e-6 * std::max(1.0, std::fabs(s.objective)));
    }
}
