#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chargebid/errors.hpp"

// Dense revised simplex for bounded-variable linear programs, two-phase with
// artificial columns. Built for the mid-size structured models in this project:
// deterministic pivoting, exact dual multipliers, optional warm starts. Rows are
// stored as a*x REL rhs and solved in equality form with one slack per row, so a
// maximization problem reports duals with the usual signs (>= 0 on "<=" rows,
// <= 0 on ">=" rows, free on "=").

namespace chargebid {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LE, EQ, GE };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        default: return "iteration_limit";
    }
}

/// maximize obj.x + offset  s.t.  rows, lo <= x <= up
struct LpProblem {
    std::vector<double> obj, lo, up;
    double offset = 0.0;

    struct Row {
        std::vector<std::pair<int, double>> coef;
        Relation rel = Relation::LE;
        double rhs = 0.0;
    };
    std::vector<Row> rows;

    int n_cols() const { return static_cast<int>(obj.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }

    int add_col(double lower, double upper, double objective) {
        lo.push_back(lower);
        up.push_back(upper);
        obj.push_back(objective);
        return n_cols() - 1;
    }

    int add_row(std::vector<std::pair<int, double>> coef, Relation rel, double rhs) {
        rows.push_back(Row{std::move(coef), rel, rhs});
        return n_rows() - 1;
    }

    void validate() const {
        for (int j = 0; j < n_cols(); ++j) {
            if (std::isnan(lo[j]) || std::isnan(up[j]) || lo[j] > up[j])
                throw InputError("bad bounds on column " + std::to_string(j));
        }
        for (const auto& r : rows) {
            if (!std::isfinite(r.rhs)) throw InputError("row rhs must be finite");
            for (const auto& [j, a] : r.coef) {
                if (j < 0 || j >= n_cols()) throw InputError("row references unknown column");
                if (!std::isfinite(a)) throw InputError("row coefficient must be finite");
            }
        }
    }
};

enum class VarState : signed char { Basic, AtLower, AtUpper, FreeZero };

/// Snapshot of a simplex basis for warm starts: one state per structural or slack
/// column plus the basic column of each row.
struct Basis {
    std::vector<VarState> state;
    std::vector<int> basic_col;  // per row
    bool reusable = false;
};

struct SimplexOptions {
    long max_iters = 0;        // 0: derived from problem size
    double feas_tol = 1e-7;    // scaled by max(1, ||rhs||_inf)
    double opt_tol = 1e-7;     // reduced-cost threshold, scaled by max(1, ||cost||_inf)
    double pivot_tol = 1e-9;
    int refactor_every = 64;
    int stall_limit = 100;     // degenerate pivots before switching to Bland's rule
};

struct LpSolution {
    LpStatus status = LpStatus::IterLimit;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;              // structural values
    std::vector<double> duals;          // per row
    std::vector<double> reduced_costs;  // per structural column
    Basis basis;
    long iterations = 0;
    double max_residual = 0.0;  // worst primal constraint violation
    double dual_gap = 0.0;      // |primal - dual| objective mismatch
};

namespace detail {

class Simplex {
public:
    Simplex(const LpProblem& p, const SimplexOptions& o) : p_(p), o_(o) { build(); }

    LpSolution run(const Basis* warm) {
        LpSolution sol;
        bool warm_ok = warm && try_warm(*warm);
        if (!warm_ok) init_cold();

        max_iters_ = o_.max_iters > 0 ? o_.max_iters : 1000 + 200L * (n_ + m_);

        if (n_art_ > 0) {
            const LpStatus s1 = run_phase(true);
            if (s1 == LpStatus::IterLimit) return finish(sol, s1);
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i)
                if (basis_[i] >= art_base_) infeas += std::fabs(xB_[i]);
            for (int j = art_base_; j < total_; ++j)
                if (state_[j] != VarState::Basic) infeas += value(j);
            if (infeas > o_.feas_tol * scale_b_) return finish(sol, LpStatus::Infeasible);
            retire_artificials();
        }
        const LpStatus s2 = run_phase(false);
        return finish(sol, s2);
    }

private:
    const LpProblem& p_;
    SimplexOptions o_;
    int n_ = 0, m_ = 0, N_ = 0;  // structural cols, rows, structural+slack cols
    int total_ = 0, art_base_ = 0, n_art_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lo_, up_, c2_, b_;
    double scale_b_ = 1.0;

    std::vector<int> basis_;        // row -> basic column
    std::vector<VarState> state_;   // column -> state
    std::vector<double> xB_;        // row -> basic value
    std::vector<double> Binv_;      // m*m row-major
    std::vector<double> cost_;      // active (phase) costs
    std::vector<double> y_, w_;     // duals and pivot column scratch

    long iters_ = 0, max_iters_ = 0;
    int since_refactor_ = 0, stall_ = 0;
    bool bland_ = false;

    void build() {
        p_.validate();
        n_ = p_.n_cols();
        m_ = p_.n_rows();
        N_ = n_ + m_;
        total_ = N_;
        art_base_ = N_;
        cols_.assign(N_, {});
        lo_.assign(N_, 0.0);
        up_.assign(N_, 0.0);
        c2_.assign(N_, 0.0);
        b_.assign(m_, 0.0);
        for (int j = 0; j < n_; ++j) {
            lo_[j] = p_.lo[j];
            up_[j] = p_.up[j];
            c2_[j] = p_.obj[j];
        }
        for (int i = 0; i < m_; ++i) {
            const auto& row = p_.rows[i];
            b_[i] = row.rhs;
            for (const auto& [j, a] : row.coef) {
                // merge duplicate column references within a row
                bool merged = false;
                for (auto& e : cols_[j])
                    if (e.first == i) {
                        e.second += a;
                        merged = true;
                        break;
                    }
                if (!merged && a != 0.0) cols_[j].push_back({i, a});
            }
            const int s = n_ + i;
            cols_[s] = {{i, 1.0}};
            switch (row.rel) {
                case Relation::LE: lo_[s] = 0.0; up_[s] = kInf; break;
                case Relation::GE: lo_[s] = -kInf; up_[s] = 0.0; break;
                case Relation::EQ: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
            scale_b_ = std::max(scale_b_, std::fabs(row.rhs));
        }
        y_.assign(m_, 0.0);
        w_.assign(m_, 0.0);
    }

    double value(int j) const {
        switch (state_[j]) {
            case VarState::AtLower: return lo_[j];
            case VarState::AtUpper: return up_[j];
            default: return 0.0;
        }
    }

    VarState default_state(int j) const {
        if (lo_[j] > -kInf) return VarState::AtLower;
        if (up_[j] < kInf) return VarState::AtUpper;
        return VarState::FreeZero;
    }

    /// Residual b - A x over the current nonbasic values.
    std::vector<double> residual() const {
        std::vector<double> r = b_;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = value(j);
            if (v == 0.0) continue;
            for (const auto& [i, a] : cols_[j]) r[i] -= a * v;
        }
        return r;
    }

    void init_cold() {
        state_.assign(N_, VarState::Basic);
        for (int j = 0; j < N_; ++j) state_[j] = default_state(j);
        basis_.assign(m_, -1);
        xB_.assign(m_, 0.0);
        Binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);

        // Crash basis: use the row's slack when the residual lies within its range,
        // otherwise add an artificial column carrying the residual.
        const std::vector<double> r = residual();
        for (int i = 0; i < m_; ++i) {
            const int s = n_ + i;
            const bool slack_ok = r[i] >= lo_[s] - 1e-12 * scale_b_ && r[i] <= up_[s] + 1e-12 * scale_b_;
            if (slack_ok) {
                basis_[i] = s;
                state_[s] = VarState::Basic;
                xB_[i] = r[i];
                Binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
            } else {
                const double sign = r[i] >= 0.0 ? 1.0 : -1.0;
                const int a = total_++;
                cols_.push_back({{i, sign}});
                lo_.push_back(0.0);
                up_.push_back(kInf);
                c2_.push_back(0.0);
                state_.push_back(VarState::Basic);
                basis_[i] = a;
                xB_[i] = std::fabs(r[i]);
                Binv_[static_cast<std::size_t>(i) * m_ + i] = sign;
                ++n_art_;
            }
        }
    }

    bool try_warm(const Basis& w) {
        if (static_cast<int>(w.state.size()) != N_ || static_cast<int>(w.basic_col.size()) != m_)
            return false;
        int basics = 0;
        for (int j = 0; j < N_; ++j)
            if (w.state[j] == VarState::Basic) ++basics;
        if (basics != m_) return false;
        for (int i = 0; i < m_; ++i) {
            const int j = w.basic_col[i];
            if (j < 0 || j >= N_ || w.state[j] != VarState::Basic) return false;
        }
        for (int j = 0; j < N_; ++j) {
            if (w.state[j] == VarState::AtLower && lo_[j] == -kInf) return false;
            if (w.state[j] == VarState::AtUpper && up_[j] == kInf) return false;
        }
        state_.assign(w.state.begin(), w.state.end());
        basis_.assign(w.basic_col.begin(), w.basic_col.end());
        xB_.assign(m_, 0.0);
        Binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        if (!refactorize(false)) return false;
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[i];
            if (xB_[i] < lo_[j] - o_.feas_tol * scale_b_ || xB_[i] > up_[j] + o_.feas_tol * scale_b_)
                return false;  // warm basis is primal infeasible here; start cold
        }
        return true;
    }

    /// Rebuilds B^-1 by Gauss-Jordan with partial pivoting and refreshes xB.
    /// Returns false (or throws) when the basis matrix is singular.
    bool refactorize(bool throw_on_singular = true) {
        std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i)
            for (const auto& [r, a] : cols_[basis_[i]]) B[static_cast<std::size_t>(r) * m_ + i] = a;
        std::vector<double>& inv = Binv_;
        inv.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
        for (int k = 0; k < m_; ++k) {
            int piv = k;
            double best = std::fabs(B[static_cast<std::size_t>(k) * m_ + k]);
            for (int i = k + 1; i < m_; ++i) {
                const double v = std::fabs(B[static_cast<std::size_t>(i) * m_ + k]);
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (best < 1e-12) {
                if (throw_on_singular) throw InternalError("singular basis matrix");
                return false;
            }
            if (piv != k) {
                for (int c = 0; c < m_; ++c) {
                    std::swap(B[static_cast<std::size_t>(piv) * m_ + c], B[static_cast<std::size_t>(k) * m_ + c]);
                    std::swap(inv[static_cast<std::size_t>(piv) * m_ + c], inv[static_cast<std::size_t>(k) * m_ + c]);
                }
            }
            const double d = B[static_cast<std::size_t>(k) * m_ + k];
            for (int c = 0; c < m_; ++c) {
                B[static_cast<std::size_t>(k) * m_ + c] /= d;
                inv[static_cast<std::size_t>(k) * m_ + c] /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == k) continue;
                const double f = B[static_cast<std::size_t>(i) * m_ + k];
                if (f == 0.0) continue;
                for (int c = 0; c < m_; ++c) {
                    B[static_cast<std::size_t>(i) * m_ + c] -= f * B[static_cast<std::size_t>(k) * m_ + c];
                    inv[static_cast<std::size_t>(i) * m_ + c] -= f * inv[static_cast<std::size_t>(k) * m_ + c];
                }
            }
        }
        recompute_xB();
        since_refactor_ = 0;
        return true;
    }

    void recompute_xB() {
        const std::vector<double> r = residual();
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = Binv_.data() + static_cast<std::size_t>(i) * m_;
            for (int k = 0; k < m_; ++k) s += row[k] * r[k];
            xB_[i] = s;
        }
    }

    void compute_duals() {
        std::fill(y_.begin(), y_.end(), 0.0);
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            const double* row = Binv_.data() + static_cast<std::size_t>(i) * m_;
            for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
        }
    }

    double reduced_cost(int j) const {
        double d = cost_[j];
        for (const auto& [i, a] : cols_[j]) d -= y_[i] * a;
        return d;
    }

    /// Chooses the entering column; returns {-1, 0} at phase optimality.
    std::pair<int, int> price(bool phase1, double dtol) {
        int best_j = -1, best_dir = 0;
        double best_score = dtol;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            if (lo_[j] == up_[j]) continue;  // fixed columns never move
            if (!phase1 && j >= art_base_) continue;
            const double d = reduced_cost(j);
            int dir = 0;
            if (state_[j] == VarState::AtLower && d > dtol) dir = 1;
            else if (state_[j] == VarState::AtUpper && d < -dtol) dir = -1;
            else if (state_[j] == VarState::FreeZero && std::fabs(d) > dtol) dir = d > 0 ? 1 : -1;
            if (dir == 0) continue;
            if (bland_) return {j, dir};  // lowest improving index
            const double score = std::fabs(d);
            if (score > best_score) {
                best_score = score;
                best_j = j;
                best_dir = dir;
            }
        }
        return {best_j, best_dir};
    }

    void compute_pivot_column(int j) {
        std::fill(w_.begin(), w_.end(), 0.0);
        for (const auto& [r, a] : cols_[j]) {
            const double av = a;
            for (int i = 0; i < m_; ++i) w_[i] += Binv_[static_cast<std::size_t>(i) * m_ + r] * av;
        }
    }

    void eta_update(int r) {
        const double piv = w_[r];
        double* rowr = Binv_.data() + static_cast<std::size_t>(r) * m_;
        for (int c = 0; c < m_; ++c) rowr[c] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = w_[i];
            if (f == 0.0) continue;
            double* rowi = Binv_.data() + static_cast<std::size_t>(i) * m_;
            for (int c = 0; c < m_; ++c) rowi[c] -= f * rowr[c];
        }
    }

    LpStatus run_phase(bool phase1) {
        cost_.assign(total_, 0.0);
        if (phase1) {
            for (int j = art_base_; j < total_; ++j) cost_[j] = -1.0;
        } else {
            for (int j = 0; j < n_; ++j) cost_[j] = c2_[j];
        }
        double cnorm = 0.0;
        for (double c : cost_) cnorm = std::max(cnorm, std::fabs(c));
        const double dtol = o_.opt_tol * std::max(1.0, cnorm);

        while (true) {
            if (iters_ >= max_iters_) return LpStatus::IterLimit;
            compute_duals();
            const auto [j, dir] = price(phase1, dtol);
            if (j < 0) return LpStatus::Optimal;  // phase optimal
            compute_pivot_column(j);

            // Ratio test: nearest blocking basic bound, or the entering column's own
            // opposite bound (a bound flip).
            const double flip_gap =
                (lo_[j] > -kInf && up_[j] < kInf) ? up_[j] - lo_[j] : kInf;
            double theta = flip_gap;
            int leave = -1;  // -1 encodes the bound flip
            double leave_w = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double d = dir * w_[i];
                const int bi = basis_[i];
                double t;
                if (d > o_.pivot_tol) {
                    if (lo_[bi] == -kInf) continue;
                    t = (xB_[i] - lo_[bi]) / d;
                } else if (d < -o_.pivot_tol) {
                    if (up_[bi] == kInf) continue;
                    t = (xB_[i] - up_[bi]) / d;
                } else {
                    continue;
                }
                if (t < 0.0) t = 0.0;  // tolerate slight bound drift
                const double tie = 1e-9 * std::max(1.0, std::fabs(theta));
                bool take = false;
                if (leave < 0 && t < theta) take = true;  // beat the flip strictly
                else if (leave >= 0 && t < theta - tie) take = true;
                else if (leave >= 0 && t <= theta + tie) {
                    // tie: Bland wants the lowest variable index; otherwise prefer a
                    // large pivot element for stability, then the lowest index.
                    if (bland_) take = bi < basis_[leave];
                    else if (std::fabs(w_[i]) > std::fabs(leave_w) + 1e-12) take = true;
                    else if (std::fabs(std::fabs(w_[i]) - std::fabs(leave_w)) <= 1e-12)
                        take = bi < basis_[leave];
                }
                if (take) {
                    theta = t;
                    leave = i;
                    leave_w = w_[i];
                }
            }

            if (theta == kInf) {
                if (phase1) throw InternalError("phase 1 reported an unbounded direction");
                return LpStatus::Unbounded;
            }

            ++iters_;
            if (leave < 0) {
                // Bound flip: the entering column runs to its other bound.
                state_[j] = state_[j] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
                for (int i = 0; i < m_; ++i) xB_[i] -= dir * theta * w_[i];
                stall_ = 0;
            } else {
                const double enter_value = value(j) + dir * theta;
                for (int i = 0; i < m_; ++i)
                    if (i != leave) xB_[i] -= dir * theta * w_[i];
                const int old = basis_[leave];
                state_[old] = dir * w_[leave] > 0 ? VarState::AtLower : VarState::AtUpper;
                if (lo_[old] == -kInf && state_[old] == VarState::AtLower) state_[old] = VarState::FreeZero;
                if (up_[old] == kInf && state_[old] == VarState::AtUpper) state_[old] = VarState::FreeZero;
                basis_[leave] = j;
                state_[j] = VarState::Basic;
                xB_[leave] = enter_value;
                eta_update(leave);
                if (++since_refactor_ >= o_.refactor_every) refactorize();

                if (theta <= 1e-10 * std::max(1.0, std::fabs(enter_value))) {
                    if (++stall_ > o_.stall_limit) bland_ = true;
                } else {
                    stall_ = 0;
                    bland_ = false;
                }
            }
        }
    }

    /// After a successful phase 1: freeze artificials at zero and pivot basic ones
    /// out where a structural/slack column can replace them (degenerate pivots).
    /// Rows whose artificial cannot be replaced are redundant; the artificial stays
    /// basic at zero and its frozen bounds keep it there.
    void retire_artificials() {
        for (int j = art_base_; j < total_; ++j) {
            lo_[j] = 0.0;
            up_[j] = 0.0;
            if (state_[j] != VarState::Basic) state_[j] = VarState::AtLower;
        }
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < art_base_) continue;
            int found = -1;
            const double* row = Binv_.data() + static_cast<std::size_t>(r) * m_;
            for (int j = 0; j < N_ && found < 0; ++j) {
                if (state_[j] == VarState::Basic || lo_[j] == up_[j]) continue;
                double alpha = 0.0;
                for (const auto& [i, a] : cols_[j]) alpha += row[i] * a;
                if (std::fabs(alpha) > 1e-7) found = j;
            }
            if (found < 0) continue;
            compute_pivot_column(found);
            const int old = basis_[r];
            basis_[r] = found;
            xB_[r] = value(found);
            state_[old] = VarState::AtLower;
            state_[found] = VarState::Basic;
            eta_update(r);
            if (++since_refactor_ >= o_.refactor_every) refactorize();
        }
    }

    LpSolution finish(LpSolution& sol, LpStatus status) {
        sol.status = status;
        sol.iterations = iters_;
        sol.x.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j)
            if (state_[j] != VarState::Basic) sol.x[j] = value(j);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) sol.x[basis_[i]] = xB_[i];

        if (status != LpStatus::Optimal) return sol;

        cost_.assign(total_, 0.0);
        for (int j = 0; j < n_; ++j) cost_[j] = c2_[j];
        compute_duals();
        sol.duals.assign(y_.begin(), y_.end());
        sol.reduced_costs.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = reduced_cost(j);

        double obj = p_.offset;
        for (int j = 0; j < n_; ++j) obj += p_.obj[j] * sol.x[j];
        sol.objective = obj;

        // Consistency checks: primal residuals and the primal/dual objective identity.
        for (int i = 0; i < m_; ++i) {
            double ax = 0.0;
            for (const auto& [j, a] : p_.rows[i].coef) ax += a * sol.x[j];
            double viol = 0.0;
            switch (p_.rows[i].rel) {
                case Relation::LE: viol = ax - p_.rows[i].rhs; break;
                case Relation::GE: viol = p_.rows[i].rhs - ax; break;
                case Relation::EQ: viol = std::fabs(ax - p_.rows[i].rhs); break;
            }
            sol.max_residual = std::max(sol.max_residual, viol);
        }
        double dual_obj = 0.0;
        for (int i = 0; i < m_; ++i) dual_obj += y_[i] * b_[i];
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = value(j);
            if (v != 0.0) dual_obj += reduced_cost(j) * v;
        }
        sol.dual_gap = std::fabs((obj - p_.offset) - dual_obj);

        sol.basis.state.assign(state_.begin(), state_.begin() + N_);
        sol.basis.basic_col.assign(basis_.begin(), basis_.end());
        sol.basis.reusable = true;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= N_) sol.basis.reusable = false;  // redundant row kept an artificial
        return sol;
    }
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p, const SimplexOptions& opts = {},
                           const Basis* warm = nullptr) {
    detail::Simplex s(p, opts);
    return s.run(warm);
}

/// Plain-text rendering of a problem for debugging.
inline std::string dump_lp(const LpProblem& p) {
    std::ostringstream os;
    os << "maximize";
    for (int j = 0; j < p.n_cols(); ++j)
        if (p.obj[j] != 0.0) os << (p.obj[j] >= 0 ? " +" : " ") << p.obj[j] << " x" << j;
    os << "\n";
    for (int i = 0; i < p.n_rows(); ++i) {
        os << "r" << i << ":";
        for (const auto& [j, a] : p.rows[i].coef) os << (a >= 0 ? " +" : " ") << a << " x" << j;
        os << (p.rows[i].rel == Relation::LE ? " <= " : p.rows[i].rel == Relation::GE ? " >= " : " = ")
           << p.rows[i].rhs << "\n";
    }
    for (int j = 0; j < p.n_cols(); ++j)
        os << "x" << j << " in [" << p.lo[j] << ", " << p.up[j] << "]\n";
    return os.str();
}

}  // namespace chargebid
