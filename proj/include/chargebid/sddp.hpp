#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/lp.hpp"
#include "chargebid/model.hpp"
#include "chargebid/rng.hpp"
#include "chargebid/station.hpp"

// Stagewise decomposition of the fixed-day-ahead sub-problem for one day-ahead
// scenario group. The horizon is split into blocks of consecutive quarters; each
// stage trades the group's shared intraday curves and schedules the station for
// every (sampled) intraday scenario, carrying battery and tank levels between
// stages. Future value is a single variable bounded by cuts collected in
// backward passes; cut slopes come from the duals of the state-pinning rows.
//
// Two value estimates drive the stopping rule: the first-stage objective (an
// optimistic bound, since cuts over-approximate the future) and the realized
// value accumulated along forward passes (a feasible-policy estimate).

namespace chargebid {

struct StagePartition {
    int quarters = 0, stages = 0, per = 0;

    static StagePartition make(int quarters, int stages) {
        if (stages < 1 || quarters < 1 || quarters % stages != 0)
            throw InputError("stage count must divide the number of quarters");
        return StagePartition{quarters, stages, quarters / stages};
    }
    int t0(int q) const { return q * per; }
    int t1(int q) const { return (q + 1) * per - 1; }  // inclusive
};

/// A cut supporting the value-to-go after some stage: value at the anchor states
/// plus per-leaf slopes in the battery and tank levels. Cuts only apply to stage
/// problems built over the same leaf set.
struct SddpCut {
    std::vector<int> leaf_set;  // sorted leaf indices the generating problem contained
    double intercept = 0.0;     // stage value at the anchor
    std::vector<double> slope_b, slope_h, anchor_b, anchor_h;  // per leaf in leaf_set order
};

struct SddpStopStats {
    double z_bar = 0.0;   // first-stage objective (optimistic)
    double z = 0.0;       // mean realized forward value
    double sigma = 0.0;   // sample standard deviation of the forward values
    int samples = 1;
};

/// Statistical stopping rule: the optimistic bound has entered the 1.96-sigma band
/// of the realized estimate. A deterministic run (sigma = 0) instead requires the
/// two values to agree to `det_eps` relative.
inline bool sddp_converged(const SddpStopStats& s, double det_eps) {
    const double gap = s.z_bar - s.z;
    if (gap <= det_eps * std::max(1.0, std::fabs(s.z_bar))) return true;
    return gap <= 1.96 * s.sigma;
}

struct GroupSddpOptions {
    int stages = 4;
    int max_iters = 40;
    int forward_samples = 5;  // per iteration, only used when sample_size > 0
    int sample_size = 0;      // leaves per sample; 0 = always the full conditional set
    double eps = 1e-7;        // deterministic stopping tolerance (relative)
    std::uint64_t seed = 1;
    bool collect_trace = false;
    int exact_rows_limit = 2500;  // full-horizon valuation solve allowed up to this size
    SimplexOptions lp;
};

struct GroupTraceRow {
    int iteration = 0, sample = 0;
    double z_bar = 0.0, z = 0.0, sigma = 0.0;
};

struct GroupSddpResult {
    bool converged = false;
    int iterations = 0;
    double bound_profit = 0.0;    // valid optimistic value at the fixed day-ahead position
    double realized_profit = 0.0; // feasible-policy value over the full leaf set
    std::vector<double> md_slopes;        // d(bound)/d(m_d_fixed), per quarter
    std::vector<Schedule> schedules;      // per leaf, from the final full forward pass
    std::vector<BidCurve> id_curves;      // per quarter, shared within the group
    double init_b_dual = 0.0, init_h_dual = 0.0;  // marginal value of initial storage
    std::vector<GroupTraceRow> trace;
};

/// Fixed data of one day-ahead scenario group.
struct GroupInput {
    const StationSpec* spec = nullptr;
    const LoadProfile* loads = nullptr;
    const PriceGrid* id_grid = nullptr;
    std::vector<std::vector<double>> leaf_prices;  // [leaf][quarter], EUR/MWh
    std::vector<double> leaf_prob;                 // conditional probabilities, sum 1
    std::vector<double> m_d_fixed;                 // day-ahead delivery per quarter, kWh
};

/// Exact value of the tail problem from one quarter onward at pinned storage states,
/// with the state duals of the pin rows; diagnostic for validating cut slopes.
struct TailValue {
    double value = 0.0;
    std::vector<double> b_dual, h_dual;  // per leaf
};

namespace detail {

/// One stage's LP plus the index maps needed to read the solution back.
struct StageLp {
    LpProblem lp;
    int t0 = 0, per = 0, i_id = 0, n_sample = 0;
    int rho_base = 0, bin_base = 0, hin_base = 0, leaf_base = 0, theta = -1;
    std::vector<int> pin_b_rows, pin_h_rows;  // per sample position
    std::vector<int> balance_rows;            // (position * per + dt)

    int rho(int i, int dt) const { return rho_base + dt * i_id + i; }
    int b_in(int s) const { return bin_base + s; }
    int h_in(int s) const { return hin_base + s; }
    int lv(int s, int dt, LeafVar k) const {
        return leaf_base + (s * per + dt) * kLeafVarCount + k;
    }
};

class GroupSddp {
public:
    GroupSddp(const GroupInput& in, const GroupSddpOptions& opts)
        : in_(in), o_(opts), part_(StagePartition::make(static_cast<int>(in.m_d_fixed.size()),
                                                        opts.stages)) {
        const auto& loads = *in_.loads;
        if (loads.quarters() != in_.m_d_fixed.size())
            throw InputError("day-ahead position length must match the load profile");
        n_leaves_ = static_cast<int>(in_.leaf_prices.size());
        if (n_leaves_ == 0) throw InputError("scenario group has no intraday scenarios");
        q_cap_.resize(part_.quarters);
        min_price_.assign(part_.quarters, kInf);
        for (int t = 0; t < part_.quarters; ++t) {
            q_cap_[t] = loads.electricity_kwh[t] + in_.spec->b_charge_step_kwh() +
                        in_.spec->e_step_max_kwh();
            for (const auto& lp : in_.leaf_prices) min_price_[t] = std::min(min_price_[t], lp[t]);
        }
        full_set_.resize(n_leaves_);
        for (int l = 0; l < n_leaves_; ++l) full_set_[l] = l;
        pools_.resize(std::max(0, part_.stages - 1));
    }

    GroupSddpResult run() {
        GroupSddpResult res;
        Rng rng(o_.seed);
        const bool full = o_.sample_size <= 0 || o_.sample_size >= n_leaves_;
        const int n_samples = full ? 1 : std::max(1, o_.forward_samples);

        for (int k = 1; k <= o_.max_iters; ++k) {
            res.iterations = k;
            std::vector<Forward> passes;
            std::vector<double> z_values;
            for (int m = 0; m < n_samples; ++m) {
                const std::vector<int> sample = full ? full_set_ : draw_sample(rng);
                passes.push_back(forward_pass(sample));
                z_values.push_back(passes.back().realized);
            }
            SddpStopStats stats;
            stats.samples = n_samples;
            stats.z_bar = passes.front().stage1_value;
            double mean = 0.0;
            for (double z : z_values) mean += z;
            mean /= static_cast<double>(n_samples);
            stats.z = mean;
            if (n_samples > 1) {
                double ss = 0.0;
                for (double z : z_values) ss += (z - mean) * (z - mean);
                stats.sigma = std::sqrt(ss / static_cast<double>(n_samples - 1));
            }
            if (o_.collect_trace) {
                for (int m = 0; m < n_samples; ++m)
                    res.trace.push_back({k, m, stats.z_bar, z_values[m], stats.sigma});
            }
            if (sddp_converged(stats, o_.eps)) {
                res.converged = true;
                break;
            }
            for (const auto& f : passes) backward_pass(f);
        }

        // Final artifacts: one full forward pass for the implementable policy, then an
        // exact full-horizon resolve (or, for oversized groups, a single-cut backward
        // chain) for the reported bound and the day-ahead sensitivities the master uses.
        const Forward fin = forward_pass(full_set_);
        res.realized_profit = fin.realized;
        extract_policy(fin, res);
        if (exact_rows() <= o_.exact_rows_limit)
            exact_valuation(res);
        else
            valuation_chain(fin, res);
        return res;
    }

    /// Solves the tail problem from quarter t0 onward over the full leaf set, with the
    /// storage states entering t0 pinned per leaf; used to compare cut slopes against
    /// finite differences of the true stage value.
    TailValue tail_value(int t0, const std::vector<double>& b_in,
                         const std::vector<double>& h_in) {
        if (t0 < 0 || t0 >= part_.quarters) throw InputError("tail start outside horizon");
        const std::vector<double> w = renormalize(full_set_);
        StageLp st = make_block(t0, part_.quarters - t0, full_set_, w, b_in, h_in, nullptr, -1,
                                false, 0.0);
        LpSolution sol = solve_stage(st);
        TailValue tv;
        tv.value = sol.objective;
        for (int s = 0; s < n_leaves_; ++s) {
            tv.b_dual.push_back(sol.duals[st.pin_b_rows[s]]);
            tv.h_dual.push_back(sol.duals[st.pin_h_rows[s]]);
        }
        return tv;
    }

private:
    struct Forward {
        std::vector<int> sample;
        std::vector<double> weights;
        std::vector<std::vector<double>> state_b, state_h;  // per stage, per sample pos
        std::vector<LpSolution> sols;
        std::vector<StageLp> stages;
        double stage1_value = 0.0;
        double realized = 0.0;
    };

    const GroupInput& in_;
    GroupSddpOptions o_;
    StagePartition part_;
    int n_leaves_ = 0;
    std::vector<double> q_cap_, min_price_;
    std::vector<int> full_set_;
    std::vector<std::vector<SddpCut>> pools_;  // pools_[q] bounds the value after stage q

    std::vector<int> draw_sample(Rng& rng) {
        std::vector<int> pool = full_set_;
        rng.shuffle(pool);
        pool.resize(static_cast<std::size_t>(std::min(o_.sample_size, n_leaves_)));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    std::vector<double> renormalize(const std::vector<int>& sample) const {
        std::vector<double> w;
        double total = 0.0;
        for (int l : sample) total += in_.leaf_prob[l];
        if (total <= 0.0) throw InternalError("sampled leaves carry no probability");
        for (int l : sample) w.push_back(in_.leaf_prob[l] / total);
        return w;
    }

    /// Upper bound on the profit obtainable after stage q: zero unless some later
    /// price is negative, in which case buying at that price is itself profitable.
    double theta_cap(int q) const {
        double cap = 0.0;
        for (int t = part_.t1(q) + 1; t < part_.quarters; ++t)
            cap += q_cap_[t] * std::max(0.0, -min_price_[t]) / 1000.0;
        return cap;
    }

    StageLp build_stage(int q, const std::vector<int>& sample, const std::vector<double>& weights,
                        const std::vector<double>& state_b, const std::vector<double>& state_h,
                        const SddpCut* chain_cut, bool use_pool) const {
        const bool theta = q + 1 < part_.stages;
        return make_block(part_.t0(q), part_.per, sample, weights, state_b, state_h, chain_cut,
                          use_pool ? q : -1, theta, theta ? theta_cap(q) : 0.0);
    }

    /// Builds the LP for `per` consecutive quarters starting at `t0`: one intraday bid
    /// curve per quarter cleared against every sampled leaf, storage recursions pinned
    /// to the incoming states, plus (optionally) a future-value column bounded by cuts.
    StageLp make_block(int t0, int per, const std::vector<int>& sample,
                       const std::vector<double>& weights, const std::vector<double>& state_b,
                       const std::vector<double>& state_h, const SddpCut* chain_cut,
                       int pool_index, bool with_theta, double theta_cap_value) const {
        const StationSpec& spec = *in_.spec;
        const LoadProfile& loads = *in_.loads;
        StageLp st;
        st.t0 = t0;
        st.per = per;
        st.i_id = static_cast<int>(in_.id_grid->size());
        st.n_sample = static_cast<int>(sample.size());
        LpProblem& lp = st.lp;

        st.rho_base = lp.n_cols();
        for (int dt = 0; dt < st.per; ++dt)
            for (int i = 0; i < st.i_id; ++i) lp.add_col(0.0, q_cap_[st.t0 + dt], 0.0);

        st.bin_base = lp.n_cols();
        for (int s = 0; s < st.n_sample; ++s) lp.add_col(-kInf, kInf, 0.0);
        st.hin_base = lp.n_cols();
        for (int s = 0; s < st.n_sample; ++s) lp.add_col(-kInf, kInf, 0.0);

        st.leaf_base = lp.n_cols();
        for (int s = 0; s < st.n_sample; ++s) {
            const auto& prices = in_.leaf_prices[sample[s]];
            for (int dt = 0; dt < st.per; ++dt) {
                const int t = st.t0 + dt;
                lp.add_col(0.0, kInf, -weights[s] * prices[t] / 1000.0);   // m_i
                lp.add_col(0.0, kInf, 0.0);                                // v_e
                lp.add_col(0.0, spec.b_charge_step_kwh(), 0.0);            // b_c
                lp.add_col(0.0, spec.b_discharge_step_kwh(), 0.0);         // b_d
                lp.add_col(0.0, spec.b_level_max_kwh, 0.0);                // b_l
                lp.add_col(0.0, spec.e_step_max_kwh(), 0.0);               // e_p
                lp.add_col(0.0, kInf, 0.0);                                // v_h
                lp.add_col(0.0, spec.h_inject_step_kg(), 0.0);             // h_c
                lp.add_col(0.0, spec.h_withdraw_step_kg(), 0.0);           // h_d
                lp.add_col(0.0, spec.h_level_max_kg, 0.0);                 // h_l
            }
        }
        if (with_theta) st.theta = lp.add_col(-kInf, theta_cap_value, 1.0);

        for (int s = 0; s < st.n_sample; ++s) {
            st.pin_b_rows.push_back(lp.add_row({{st.b_in(s), 1.0}}, Relation::EQ, state_b[s]));
            st.pin_h_rows.push_back(lp.add_row({{st.h_in(s), 1.0}}, Relation::EQ, state_h[s]));
        }

        // Legal curves are non-increasing in price; within a stage this couples the
        // leaves cleared from the same quarter's curve.
        for (int dt = 0; dt < st.per; ++dt)
            for (int i = 0; i + 1 < st.i_id; ++i)
                lp.add_row({{st.rho(i + 1, dt), 1.0}, {st.rho(i, dt), -1.0}}, Relation::LE, 0.0);

        for (int s = 0; s < st.n_sample; ++s) {
            const auto& prices = in_.leaf_prices[sample[s]];
            for (int dt = 0; dt < st.per; ++dt) {
                const int t = st.t0 + dt;
                auto v = [&](LeafVar k) { return st.lv(s, dt, k); };

                std::vector<std::pair<int, double>> clear;
                detail::add_clearing_coefs(clear, *in_.id_grid, prices[t], st.rho(0, dt), 1,
                                           "intraday");
                clear.push_back({v(kMI), -1.0});
                lp.add_row(std::move(clear), Relation::EQ, 0.0);

                st.balance_rows.push_back(lp.add_row({{v(kVE), 1.0},
                                                      {v(kBC), 1.0},
                                                      {v(kEP), 1.0},
                                                      {v(kMI), -1.0}},
                                                     Relation::EQ, in_.m_d_fixed[t]));

                {
                    std::vector<std::pair<int, double>> coef{{v(kBL), 1.0},
                                                             {v(kBC), -spec.eta_b},
                                                             {v(kBD), 1.0 / spec.eta_b}};
                    coef.push_back({dt == 0 ? st.b_in(s) : st.lv(s, dt - 1, kBL), -1.0});
                    lp.add_row(std::move(coef), Relation::EQ, 0.0);
                }
                {
                    std::vector<std::pair<int, double>> coef{{v(kHL), 1.0},
                                                             {v(kHC), -spec.eta_h},
                                                             {v(kHD), 1.0 / spec.eta_h}};
                    coef.push_back({dt == 0 ? st.h_in(s) : st.lv(s, dt - 1, kHL), -1.0});
                    lp.add_row(std::move(coef), Relation::EQ, 0.0);
                }

                lp.add_row({{v(kEP), spec.eta_e / spec.hv_kwh_per_kg},
                            {v(kHC), -1.0},
                            {v(kVH), -1.0}},
                           Relation::EQ, 0.0);

                lp.add_row({{v(kVE), 1.0}, {v(kBD), 1.0}}, Relation::GE, loads.electricity_kwh[t]);
                lp.add_row({{v(kVH), 1.0}, {v(kHD), 1.0}}, Relation::GE, loads.hydrogen_kg[t]);
            }
        }

        auto add_cut_row = [&](const SddpCut& cut) {
            if (cut.leaf_set != sample) return;
            // theta <= intercept + sum_s slope.(state_out - anchor)
            std::vector<std::pair<int, double>> coef{{st.theta, 1.0}};
            double rhs = cut.intercept;
            for (int s = 0; s < st.n_sample; ++s) {
                coef.push_back({st.lv(s, st.per - 1, kBL), -cut.slope_b[s]});
                coef.push_back({st.lv(s, st.per - 1, kHL), -cut.slope_h[s]});
                rhs -= cut.slope_b[s] * cut.anchor_b[s] + cut.slope_h[s] * cut.anchor_h[s];
            }
            lp.add_row(std::move(coef), Relation::LE, rhs);
        };
        if (st.theta >= 0) {
            if (chain_cut) add_cut_row(*chain_cut);
            if (pool_index >= 0)
                for (const auto& cut : pools_[pool_index]) add_cut_row(cut);
        }
        return st;
    }

    LpSolution solve_stage(const StageLp& st) const {
        LpSolution sol = solve_lp(st.lp, o_.lp);
        if (sol.status != LpStatus::Optimal)
            throw InternalError(std::string("stage problem not optimal: ") + to_string(sol.status));
        return sol;
    }

    Forward forward_pass(const std::vector<int>& sample) {
        Forward f;
        f.sample = sample;
        f.weights = renormalize(sample);
        const int S = static_cast<int>(sample.size());
        std::vector<double> sb(S, in_.spec->b_init_kwh), sh(S, in_.spec->h_init_kg);
        for (int q = 0; q < part_.stages; ++q) {
            StageLp st = build_stage(q, sample, f.weights, sb, sh, nullptr, true);
            LpSolution sol = solve_stage(st);
            const double theta = st.theta >= 0 ? sol.x[st.theta] : 0.0;
            f.realized += sol.objective - theta;
            if (q == 0) f.stage1_value = sol.objective;
            for (int s = 0; s < S; ++s) {
                sb[s] = sol.x[st.lv(s, st.per - 1, kBL)];
                sh[s] = sol.x[st.lv(s, st.per - 1, kHL)];
            }
            f.state_b.push_back(sb);
            f.state_h.push_back(sh);
            f.stages.push_back(std::move(st));
            f.sols.push_back(std::move(sol));
        }
        return f;
    }

    /// Adds one cut per stage boundary along the forward trajectory, each built from
    /// the stage problem re-solved with the pool updated at deeper stages first.
    void backward_pass(const Forward& f) {
        for (int q = part_.stages - 1; q >= 1; --q) {
            StageLp st = build_stage(q, f.sample, f.weights, f.state_b[q - 1], f.state_h[q - 1],
                                     nullptr, true);
            LpSolution sol = solve_stage(st);
            pools_[q - 1].push_back(make_cut(f, q, st, sol));
        }
    }

    SddpCut make_cut(const Forward& f, int q, const StageLp& st, const LpSolution& sol) const {
        SddpCut cut;
        cut.leaf_set = f.sample;
        cut.intercept = sol.objective;
        const int S = static_cast<int>(f.sample.size());
        for (int s = 0; s < S; ++s) {
            cut.slope_b.push_back(sol.duals[st.pin_b_rows[s]]);
            cut.slope_h.push_back(sol.duals[st.pin_h_rows[s]]);
            cut.anchor_b.push_back(f.state_b[q - 1][s]);
            cut.anchor_h.push_back(f.state_h[q - 1][s]);
        }
        return cut;
    }

    /// Number of rows in the full-horizon valuation LP, used to decide whether the
    /// exact resolve is affordable for this group.
    int exact_rows() const {
        const int T = part_.quarters;
        const int I = static_cast<int>(in_.id_grid->size());
        return 7 * n_leaves_ * T + (I - 1) * T + 2 * n_leaves_;
    }

    /// Solves the whole group over all quarters and leaves as one LP at the fixed
    /// day-ahead position. Its objective is the exact group value, the balance-row
    /// duals are an exact supergradient in the day-ahead deliveries, and the pin-row
    /// duals price the initial storage contents; this yields a tight optimality cut
    /// for the coordinating master problem.
    void exact_valuation(GroupSddpResult& res) {
        const std::vector<double> w = renormalize(full_set_);
        const std::vector<double> init_b(n_leaves_, in_.spec->b_init_kwh);
        const std::vector<double> init_h(n_leaves_, in_.spec->h_init_kg);
        StageLp st = make_block(0, part_.quarters, full_set_, w, init_b, init_h, nullptr, -1,
                                false, 0.0);
        LpSolution sol = solve_stage(st);
        res.bound_profit = sol.objective;
        res.md_slopes.assign(part_.quarters, 0.0);
        for (int s = 0; s < n_leaves_; ++s) {
            for (int dt = 0; dt < st.per; ++dt)
                res.md_slopes[dt] += sol.duals[st.balance_rows[s * st.per + dt]];
            res.init_b_dual += sol.duals[st.pin_b_rows[s]];
            res.init_h_dual += sol.duals[st.pin_h_rows[s]];
        }
    }

    /// Fallback bound for groups too large for the exact resolve: re-solves the stages
    /// along the final trajectory bottom-up, each seeing only the cut just built from
    /// the stage below. The chain composes into one supporting plane of the group
    /// value as a function of the day-ahead position -- valid as a bound, but its
    /// slopes can be weak when the stage problems are dual-degenerate, so iteration
    /// counts of the coordinating loop may grow.
    void valuation_chain(const Forward& f, GroupSddpResult& res) {
        res.md_slopes.assign(part_.quarters, 0.0);
        SddpCut chain;
        bool have_chain = false;
        const int S = static_cast<int>(f.sample.size());
        const std::vector<double> init_b(S, in_.spec->b_init_kwh);
        const std::vector<double> init_h(S, in_.spec->h_init_kg);
        for (int q = part_.stages - 1; q >= 0; --q) {
            const std::vector<double>& sb = q == 0 ? init_b : f.state_b[q - 1];
            const std::vector<double>& sh = q == 0 ? init_h : f.state_h[q - 1];
            StageLp st = build_stage(q, f.sample, f.weights, sb, sh,
                                     have_chain ? &chain : nullptr, false);
            LpSolution sol = solve_stage(st);
            for (int s = 0; s < S; ++s)
                for (int dt = 0; dt < st.per; ++dt)
                    res.md_slopes[st.t0 + dt] += sol.duals[st.balance_rows[s * st.per + dt]];
            if (q > 0) {
                chain = make_cut(f, q, st, sol);
                have_chain = true;
            } else {
                res.bound_profit = sol.objective;
                for (int s = 0; s < S; ++s) {
                    res.init_b_dual += sol.duals[st.pin_b_rows[s]];
                    res.init_h_dual += sol.duals[st.pin_h_rows[s]];
                }
            }
        }
    }

    void extract_policy(const Forward& f, GroupSddpResult& res) {
        res.id_curves.assign(part_.quarters, BidCurve{});
        res.schedules.assign(n_leaves_, Schedule{});
        for (int q = 0; q < part_.stages; ++q) {
            const StageLp& st = f.stages[q];
            const LpSolution& sol = f.sols[q];
            for (int dt = 0; dt < st.per; ++dt) {
                BidCurve c;
                c.grid = *in_.id_grid;
                for (int i = 0; i < st.i_id; ++i) c.volumes.push_back(sol.x[st.rho(i, dt)]);
                res.id_curves[st.t0 + dt] = std::move(c);
            }
            for (int s = 0; s < static_cast<int>(f.sample.size()); ++s) {
                Schedule& sc = res.schedules[f.sample[s]];
                for (int dt = 0; dt < st.per; ++dt) {
                    sc.m_i.push_back(sol.x[st.lv(s, dt, kMI)]);
                    sc.v_e.push_back(sol.x[st.lv(s, dt, kVE)]);
                    sc.b_c.push_back(sol.x[st.lv(s, dt, kBC)]);
                    sc.b_d.push_back(sol.x[st.lv(s, dt, kBD)]);
                    sc.b_l.push_back(sol.x[st.lv(s, dt, kBL)]);
                    sc.e_p.push_back(sol.x[st.lv(s, dt, kEP)]);
                    sc.v_h.push_back(sol.x[st.lv(s, dt, kVH)]);
                    sc.h_c.push_back(sol.x[st.lv(s, dt, kHC)]);
                    sc.h_d.push_back(sol.x[st.lv(s, dt, kHD)]);
                    sc.h_l.push_back(sol.x[st.lv(s, dt, kHL)]);
                }
            }
        }
    }
};

}  // namespace detail

/// Solves one day-ahead scenario group's sub-problem by stagewise decomposition.
inline GroupSddpResult run_group_sddp(const GroupInput& in, const GroupSddpOptions& opts) {
    detail::GroupSddp g(in, opts);
    return g.run();
}

/// Exact tail value and state duals for one group at pinned per-leaf storage states.
inline TailValue group_tail_value(const GroupInput& in, const GroupSddpOptions& opts, int t0,
                                  const std::vector<double>& b_in,
                                  const std::vector<double>& h_in) {
    detail::GroupSddp g(in, opts);
    return g.tail_value(t0, b_in, h_in);
}

/// True when any scenario price is negative, which weakens the zero upper bound on
/// future profit; callers surface this as a warning.
inline bool has_negative_prices(const ScenarioTree& tree) {
    for (const auto& s : tree.da.scenarios)
        for (double p : s)
            if (p < 0) return true;
    for (const auto& set : tree.id)
        for (const auto& s : set.scenarios)
            for (double p : s)
                if (p < 0) return true;
    return false;
}

}  // namespace chargebid
