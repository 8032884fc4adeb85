#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/lp.hpp"

// Small best-first branch-and-bound for LPs with binary columns. Only needed to
// cross-check that dropping the mutual-exclusion binaries does not change the
// optimum; instances stay small, so no cuts, no heuristics.

namespace chargebid {

struct MipOptions {
    double abs_gap = 1e-6;        // stop when best bound - incumbent <= abs_gap
    double int_tol = 1e-6;        // integrality tolerance on binary columns
    long max_nodes = 200000;
    SimplexOptions lp;
};

struct MipResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double best_bound = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    long nodes = 0;
};

/// Maximizes over the given problem with the listed columns restricted to {0, 1}.
/// With an empty `binaries` list this reduces to a single LP solve.
inline MipResult solve_mip(const LpProblem& p, const std::vector<int>& binaries,
                           const MipOptions& opts = {}) {
    for (int j : binaries) {
        if (j < 0 || j >= p.n_cols()) throw InputError("binary column index out of range");
        if (p.lo[j] < -1e-12 || p.up[j] > 1.0 + 1e-12)
            throw InputError("binary columns must have bounds within [0, 1]");
    }

    struct Node {
        double bound;
        long id;
        std::vector<std::pair<int, double>> fixes;  // column -> fixed value
        bool operator<(const Node& o) const {
            if (bound != o.bound) return bound < o.bound;  // max-heap on bound
            return id > o.id;                              // FIFO among equals
        }
    };

    MipResult res;
    std::priority_queue<Node> open;
    long next_id = 0;
    open.push(Node{kInf, next_id++, {}});
    bool have_incumbent = false;
    double incumbent = -kInf;
    std::vector<double> incumbent_x;
    double best_bound = kInf;

    while (!open.empty()) {
        if (res.nodes >= opts.max_nodes) {
            res.status = LpStatus::IterLimit;
            break;
        }
        Node node = open.top();
        open.pop();
        best_bound = node.bound;
        if (have_incumbent && best_bound <= incumbent + opts.abs_gap) {
            best_bound = std::max(best_bound, incumbent);
            break;  // proven within gap
        }

        LpProblem sub = p;
        for (const auto& [j, v] : node.fixes) {
            sub.lo[j] = v;
            sub.up[j] = v;
        }
        ++res.nodes;
        const LpSolution rel = solve_lp(sub, opts.lp);
        if (rel.status == LpStatus::Infeasible) continue;
        if (rel.status == LpStatus::Unbounded) {
            res.status = LpStatus::Unbounded;
            return res;
        }
        if (rel.status == LpStatus::IterLimit) {
            res.status = LpStatus::IterLimit;
            break;
        }
        if (have_incumbent && rel.objective <= incumbent + opts.abs_gap) continue;

        // Most fractional binary; ties go to the lowest column index.
        int branch_col = -1;
        double worst = opts.int_tol;
        for (int j : binaries) {
            const double f = std::fabs(rel.x[j] - std::round(rel.x[j]));
            if (f > worst) {
                worst = f;
                branch_col = j;
            }
        }
        if (branch_col < 0) {
            if (!have_incumbent || rel.objective > incumbent) {
                have_incumbent = true;
                incumbent = rel.objective;
                incumbent_x = rel.x;
            }
            continue;
        }
        for (double v : {0.0, 1.0}) {
            Node child{rel.objective, next_id++, node.fixes};
            child.fixes.push_back({branch_col, v});
            open.push(child);
        }
    }

    if (open.empty()) best_bound = have_incumbent ? incumbent : -kInf;
    if (have_incumbent) {
        if (res.status != LpStatus::IterLimit) res.status = LpStatus::Optimal;
        res.objective = incumbent;
        res.x = std::move(incumbent_x);
        res.best_bound = best_bound;
    } else if (res.status != LpStatus::IterLimit && res.status != LpStatus::Unbounded) {
        res.status = LpStatus::Infeasible;
    }
    return res;
}

}  // namespace chargebid
