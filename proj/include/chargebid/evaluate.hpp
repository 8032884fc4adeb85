#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/lp.hpp"
#include "chargebid/market_data.hpp"
#include "chargebid/model.hpp"
#include "chargebid/rng.hpp"
#include "chargebid/scenario.hpp"
#include "chargebid/station.hpp"

// Out-of-sample evaluation of a solved policy. Every draw clears the day-ahead
// curves at drawn prices, attributes the day to the nearest day-ahead scenario to
// pick the intraday curves, clears those, and then re-optimizes the station
// against the bought energy; service revenue is earned only for load actually
// covered. A replay mode skips the re-optimization and simply reprices the
// in-sample schedule.

namespace chargebid {

/// Everything needed to evaluate a policy out of sample.
struct PolicyBundle {
    StationSpec spec;
    LoadProfile loads;
    ScenarioTree tree;
    PolicyCurves curves;
    std::vector<std::vector<double>> m_d;  // in-sample cleared volume per (scenario, quarter)
    std::vector<Schedule> schedules;       // per leaf
    double in_sample_objective = 0.0;

    void validate() const {
        spec.validate();
        loads.validate();
        tree.validate();
        if (curves.da.size() != tree.hours()) throw InputError("one day-ahead curve per hour required");
        if (curves.id.size() != tree.n_da())
            throw InputError("one intraday curve family per day-ahead scenario required");
        for (const auto& c : curves.da) c.validate();
        for (const auto& fam : curves.id) {
            if (fam.size() != tree.quarters())
                throw InputError("one intraday curve per quarter required");
            for (const auto& c : fam) c.validate();
        }
    }
};

/// Price generator interface: fills one day of hourly and quarter-hourly prices
/// for the given draw index. Implementations must be deterministic in (seed, index).
class Sampler {
public:
    virtual ~Sampler() = default;
    virtual void draw(std::uint64_t index, std::vector<double>& da_hourly,
                      std::vector<double>& id_quarterly) const = 0;
};

/// Independent normals per interval, fitted to historical day matrices.
class NormalSampler : public Sampler {
public:
    NormalSampler(const PriceMatrix& da, const PriceMatrix& id, std::uint64_t seed)
        : seed_(seed) {
        fit(da, mu_da_, sd_da_);
        fit(id, mu_id_, sd_id_);
    }

    void draw(std::uint64_t index, std::vector<double>& da_hourly,
              std::vector<double>& id_quarterly) const override {
        Rng rng(derive_seed(seed_, index));
        da_hourly.resize(mu_da_.size());
        for (std::size_t i = 0; i < mu_da_.size(); ++i)
            da_hourly[i] = rng.normal(mu_da_[i], sd_da_[i]);
        id_quarterly.resize(mu_id_.size());
        for (std::size_t i = 0; i < mu_id_.size(); ++i)
            id_quarterly[i] = rng.normal(mu_id_[i], sd_id_[i]);
    }

private:
    static void fit(const PriceMatrix& m, std::vector<double>& mu, std::vector<double>& sd) {
        if (m.rows() < 2) throw InputError("price sampler needs at least 2 days of data");
        mu.assign(m.cols, 0.0);
        sd.assign(m.cols, 0.0);
        for (std::size_t c = 0; c < m.cols; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) s += m.at(r, c);
            mu[c] = s / static_cast<double>(m.rows());
            double v = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                const double d = m.at(r, c) - mu[c];
                v += d * d;
            }
            sd[c] = std::sqrt(v / static_cast<double>(m.rows() - 1));
        }
    }

    std::uint64_t seed_;
    std::vector<double> mu_da_, sd_da_, mu_id_, sd_id_;
};

/// Always returns the same fixed day; the degenerate case used to confirm that the
/// evaluation machinery reproduces in-sample scenario values.
class FixedSampler : public Sampler {
public:
    FixedSampler(std::vector<double> da, std::vector<double> id)
        : da_(std::move(da)), id_(std::move(id)) {}

    void draw(std::uint64_t, std::vector<double>& da_hourly,
              std::vector<double>& id_quarterly) const override {
        da_hourly = da_;
        id_quarterly = id_;
    }

private:
    std::vector<double> da_, id_;
};

struct McOptions {
    int draws = 500;
    std::uint64_t seed = 7;
    bool replay = false;  // reprice the in-sample schedule instead of re-optimizing
    int threads = 1;
    int histogram_bins = 20;
    SimplexOptions lp;
};

struct HistogramBin {
    double lo = 0.0, hi = 0.0;
    long count = 0;
};

struct McReport {
    std::vector<double> profits;  // per draw, EUR
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
    std::vector<HistogramBin> histogram;
    long clipped_prices = 0;  // draws' out-of-grid prices clipped to the grid edge
};

namespace detail {

/// Station re-optimization for a fixed bought-energy path M(t): maximize the revenue
/// of load actually served. Always feasible -- excess energy can be dumped and unmet
/// load simply earns nothing.
inline double reoptimize_revenue(const StationSpec& spec, const LoadProfile& loads,
                                 const std::vector<double>& bought_kwh,
                                 const SimplexOptions& lp_opts) {
    const int T = static_cast<int>(loads.quarters());
    LpProblem lp;
    // per quarter: s_e, s_h (served), v_e, b_c, b_d, b_l, e_p, v_h, h_c, h_d, h_l
    constexpr int W = 11;
    auto col = [&](int t, int k) { return t * W + k; };
    for (int t = 0; t < T; ++t) {
        lp.add_col(0.0, loads.electricity_kwh[t], spec.lambda_e_eur_kwh);  // s_e
        lp.add_col(0.0, loads.hydrogen_kg[t], spec.lambda_h_eur_kg);       // s_h
        lp.add_col(0.0, kInf, 0.0);                                        // v_e
        lp.add_col(0.0, spec.b_charge_step_kwh(), 0.0);                    // b_c
        lp.add_col(0.0, spec.b_discharge_step_kwh(), 0.0);                 // b_d
        lp.add_col(0.0, spec.b_level_max_kwh, 0.0);                        // b_l
        lp.add_col(0.0, spec.e_step_max_kwh(), 0.0);                       // e_p
        lp.add_col(0.0, kInf, 0.0);                                        // v_h
        lp.add_col(0.0, spec.h_inject_step_kg(), 0.0);                     // h_c
        lp.add_col(0.0, spec.h_withdraw_step_kg(), 0.0);                   // h_d
        lp.add_col(0.0, spec.h_level_max_kg, 0.0);                         // h_l
    }
    for (int t = 0; t < T; ++t) {
        lp.add_row({{col(t, 2), 1.0}, {col(t, 3), 1.0}, {col(t, 6), 1.0}}, Relation::EQ,
                   bought_kwh[t]);
        {
            std::vector<std::pair<int, double>> coef{{col(t, 5), 1.0},
                                                     {col(t, 3), -spec.eta_b},
                                                     {col(t, 4), 1.0 / spec.eta_b}};
            double rhs = 0.0;
            if (t == 0) rhs = spec.b_init_kwh;
            else coef.push_back({col(t - 1, 5), -1.0});
            lp.add_row(std::move(coef), Relation::EQ, rhs);
        }
        {
            std::vector<std::pair<int, double>> coef{{col(t, 10), 1.0},
                                                     {col(t, 8), -spec.eta_h},
                                                     {col(t, 9), 1.0 / spec.eta_h}};
            double rhs = 0.0;
            if (t == 0) rhs = spec.h_init_kg;
            else coef.push_back({col(t - 1, 10), -1.0});
            lp.add_row(std::move(coef), Relation::EQ, rhs);
        }
        lp.add_row({{col(t, 6), spec.eta_e / spec.hv_kwh_per_kg},
                    {col(t, 8), -1.0},
                    {col(t, 7), -1.0}},
                   Relation::EQ, 0.0);
        // served <= delivered
        lp.add_row({{col(t, 0), 1.0}, {col(t, 2), -1.0}, {col(t, 4), -1.0}}, Relation::LE, 0.0);
        lp.add_row({{col(t, 1), 1.0}, {col(t, 7), -1.0}, {col(t, 9), -1.0}}, Relation::LE, 0.0);
    }
    const LpSolution sol = solve_lp(lp, lp_opts);
    if (sol.status != LpStatus::Optimal)
        throw InternalError(std::string("re-optimization not optimal: ") + to_string(sol.status));
    return sol.objective;
}

}  // namespace detail

/// Index of the day-ahead scenario nearest (Euclidean) to the drawn hourly prices;
/// ties resolve to the lowest index.
inline std::size_t nearest_da_scenario(const ScenarioTree& tree, const std::vector<double>& da) {
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t a = 0; a < tree.n_da(); ++a) {
        double d = 0.0;
        for (std::size_t h = 0; h < tree.hours(); ++h) {
            const double e = da[h] - tree.da.scenarios[a][h];
            d += e * e;
        }
        if (d < best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

/// Profit of one evaluated day; also counts prices clipped to the grid edges.
inline double evaluate_draw(const PolicyBundle& pb, std::vector<double> da,
                            std::vector<double> id, bool replay, const SimplexOptions& lp_opts,
                            long& clipped) {
    const std::size_t H = pb.tree.hours(), T = pb.tree.quarters();
    for (std::size_t h = 0; h < H; ++h) {
        const PriceGrid& g = pb.curves.da[h].grid;
        if (da[h] < g.lo() || da[h] > g.hi()) {
            da[h] = std::min(std::max(da[h], g.lo()), g.hi());
            ++clipped;
        }
    }
    const std::size_t a = nearest_da_scenario(pb.tree, da);
    for (std::size_t t = 0; t < T; ++t) {
        const PriceGrid& g = pb.curves.id[a][t].grid;
        if (id[t] < g.lo() || id[t] > g.hi()) {
            id[t] = std::min(std::max(id[t], g.lo()), g.hi());
            ++clipped;
        }
    }

    // Day-ahead clearing; the hourly volume is delivered across the four quarters in
    // the in-sample proportions (uniform unless the policy says otherwise).
    std::vector<double> bought(T, 0.0);
    double cost = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        const double vol = interpolate_volume(pb.curves.da[h], da[h]);
        cost += vol * da[h] / 1000.0;
        double in_sample_hour = 0.0;
        for (std::size_t t = 4 * h; t < 4 * h + 4; ++t) in_sample_hour += pb.m_d[a][t];
        for (std::size_t t = 4 * h; t < 4 * h + 4; ++t) {
            const double share =
                in_sample_hour > 1e-12 ? pb.m_d[a][t] / in_sample_hour : 0.25;
            bought[t] += vol * share;
        }
    }
    for (std::size_t t = 0; t < T; ++t) {
        const double vol = interpolate_volume(pb.curves.id[a][t], id[t]);
        cost += vol * id[t] / 1000.0;
        bought[t] += vol;
    }

    double revenue;
    if (replay) {
        revenue = 0.0;  // reprice the in-sample plan: full service revenue by assumption
        for (std::size_t t = 0; t < T; ++t)
            revenue += pb.loads.electricity_kwh[t] * pb.spec.lambda_e_eur_kwh +
                       pb.loads.hydrogen_kg[t] * pb.spec.lambda_h_eur_kg;
    } else {
        revenue = detail::reoptimize_revenue(pb.spec, pb.loads, bought, lp_opts);
    }
    return revenue - cost;
}

inline McReport monte_carlo(const PolicyBundle& pb, const Sampler& sampler,
                            const McOptions& opts) {
    pb.validate();
    if (opts.draws < 1) throw InputError("evaluation needs at least one draw");
    McReport rep;
    rep.profits.assign(static_cast<std::size_t>(opts.draws), 0.0);
    std::vector<long> clipped(static_cast<std::size_t>(std::max(1, opts.threads)), 0);

    auto worker = [&](int tid, int lo, int hi) {
        std::vector<double> da, id;
        for (int i = lo; i < hi; ++i) {
            sampler.draw(static_cast<std::uint64_t>(i), da, id);
            rep.profits[static_cast<std::size_t>(i)] =
                evaluate_draw(pb, da, id, opts.replay, opts.lp, clipped[static_cast<std::size_t>(tid)]);
        }
    };

    const int n_threads = std::max(1, std::min(opts.threads, opts.draws));
    if (n_threads == 1) {
        worker(0, 0, opts.draws);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (opts.draws + n_threads - 1) / n_threads;
        for (int tid = 0; tid < n_threads; ++tid) {
            const int lo = tid * chunk, hi = std::min(opts.draws, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, tid, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (long c : clipped) rep.clipped_prices += c;

    double mean = 0.0;
    for (double p : rep.profits) mean += p;
    mean /= static_cast<double>(rep.profits.size());
    rep.mean = mean;
    if (rep.profits.size() > 1) {
        double ss = 0.0;
        for (double p : rep.profits) ss += (p - mean) * (p - mean);
        rep.variance = ss / static_cast<double>(rep.profits.size() - 1);
    }

    std::vector<double> sorted = rep.profits;
    std::sort(sorted.begin(), sorted.end());
    rep.p5 = quantile_sorted(sorted, 0.05);
    rep.p25 = quantile_sorted(sorted, 0.25);
    rep.p50 = quantile_sorted(sorted, 0.50);
    rep.p75 = quantile_sorted(sorted, 0.75);
    rep.p95 = quantile_sorted(sorted, 0.95);

    const int bins = std::max(1, opts.histogram_bins);
    const double lo = sorted.front(), hi = sorted.back();
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    rep.histogram.assign(static_cast<std::size_t>(bins), {});
    for (int b = 0; b < bins; ++b) {
        rep.histogram[static_cast<std::size_t>(b)].lo = lo + b * width;
        rep.histogram[static_cast<std::size_t>(b)].hi = lo + (b + 1) * width;
    }
    for (double p : rep.profits) {
        int b = hi > lo ? static_cast<int>((p - lo) / width) : 0;
        b = std::min(std::max(b, 0), bins - 1);
        ++rep.histogram[static_cast<std::size_t>(b)].count;
    }
    return rep;
}

/// In-sample value of the policy in one scenario leaf, computed from the curves
/// themselves (the same arithmetic the evaluator uses).
inline double in_sample_leaf_profit(const PolicyBundle& pb, std::size_t a, std::size_t b) {
    double profit = 0.0;
    for (std::size_t t = 0; t < pb.tree.quarters(); ++t)
        profit += pb.loads.electricity_kwh[t] * pb.spec.lambda_e_eur_kwh +
                  pb.loads.hydrogen_kg[t] * pb.spec.lambda_h_eur_kg;
    for (std::size_t h = 0; h < pb.tree.hours(); ++h) {
        const double price = pb.tree.da.scenarios[a][h];
        profit -= interpolate_volume(pb.curves.da[h], price) * price / 1000.0;
    }
    for (std::size_t t = 0; t < pb.tree.quarters(); ++t) {
        const double price = pb.tree.id[a].scenarios[b][t];
        profit -= interpolate_volume(pb.curves.id[a][t], price) * price / 1000.0;
    }
    return profit;
}

}  // namespace chargebid
