#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "chargebid/errors.hpp"
#include "chargebid/market_data.hpp"
#include "chargebid/rng.hpp"

// Scenario reduction: Lloyd's k-means over historical day vectors, cluster
// probabilities from member counts, and the two-level day-ahead/intraday tree.

namespace chargebid {

struct KmeansResult {
    std::vector<std::vector<double>> centroids;  // k rows
    std::vector<std::size_t> assignment;         // data row -> centroid index
    std::vector<std::size_t> counts;             // members per centroid
    std::vector<double> j_history;               // within-cluster sum of squares per iteration
    std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

/// Lloyd's algorithm. Initial centroids are k distinct rows chosen by a seeded
/// shuffle; distance ties go to the lowest centroid index; an empty cluster is
/// re-seeded to the data point farthest from its previous centroid. The objective
/// J never increases between iterations.
inline KmeansResult kmeans(const PriceMatrix& data, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100) {
    const std::size_t R = data.rows();
    if (k == 0) throw InputError("k-means needs k >= 1");
    if (R < k) throw InputError("k-means needs at least k data rows");

    KmeansResult res;
    res.assignment.assign(R, 0);
    res.counts.assign(k, 0);

    // Seed with distinct rows (distinct by value) in shuffled order; if the data has
    // fewer than k distinct rows, fall back to duplicates and let re-seeding sort it out.
    {
        std::vector<std::size_t> idx(R);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(seed);
        rng.shuffle(idx);
        for (std::size_t i : idx) {
            if (res.centroids.size() == k) break;
            const auto row = data.row(i);
            bool dup = false;
            for (const auto& c : res.centroids)
                if (c == row) dup = true;
            if (!dup) res.centroids.push_back(row);
        }
        for (std::size_t i = 0; res.centroids.size() < k; ++i) res.centroids.push_back(data.row(idx[i]));
    }

    std::vector<std::size_t> prev_assignment;
    for (std::size_t it = 0; it < max_iter; ++it) {
        // Assignment step, recording J with the current centroids.
        double j = 0;
        std::fill(res.counts.begin(), res.counts.end(), std::size_t{0});
        for (std::size_t r = 0; r < R; ++r) {
            const auto row = data.row(r);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = detail::sq_dist(row, res.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            res.assignment[r] = best;
            ++res.counts[best];
            j += best_d;
        }
        res.j_history.push_back(j);
        res.iterations = it + 1;
        if (res.assignment == prev_assignment) break;
        prev_assignment = res.assignment;

        // Update step: means of members; empty clusters jump to the farthest point.
        std::vector<std::vector<double>> next(k, std::vector<double>(data.cols, 0.0));
        for (std::size_t r = 0; r < R; ++r) {
            const std::size_t c = res.assignment[r];
            for (std::size_t d = 0; d < data.cols; ++d) next[c][d] += data.at(r, d);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (res.counts[c] > 0) {
                for (double& v : next[c]) v /= static_cast<double>(res.counts[c]);
            } else {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t r = 0; r < R; ++r) {
                    const double d = detail::sq_dist(data.row(r), res.centroids[c]);
                    if (d > far_d) {
                        far_d = d;
                        far = r;
                    }
                }
                next[c] = data.row(far);
            }
        }
        res.centroids = std::move(next);
    }
    return res;
}

/// A reduced scenario set: price vectors with probabilities proportional to cluster
/// membership. Empty clusters are pruned; probabilities sum to 1.
struct ScenarioSet {
    std::vector<std::vector<double>> scenarios;
    std::vector<double> probabilities;

    std::size_t size() const { return scenarios.size(); }
};

inline ScenarioSet make_scenario_set(const KmeansResult& km) {
    std::size_t total = 0;
    for (std::size_t c : km.counts) total += c;
    if (total == 0) throw InputError("cannot build scenario set from empty clustering");
    ScenarioSet s;
    for (std::size_t c = 0; c < km.centroids.size(); ++c) {
        if (km.counts[c] == 0) continue;
        s.scenarios.push_back(km.centroids[c]);
        s.probabilities.push_back(static_cast<double>(km.counts[c]) / static_cast<double>(total));
    }
    return s;
}

/// Two-level scenario tree. Level 1 holds hourly day-ahead price scenarios; level 2
/// holds one quarter-hourly intraday set per day-ahead scenario. A leaf is a pair
/// (day-ahead index, intraday index) with joint probability = product of the two.
struct ScenarioTree {
    ScenarioSet da;
    std::vector<ScenarioSet> id;  // id[xi1] is the conditional intraday set

    std::size_t hours() const { return da.scenarios.empty() ? 0 : da.scenarios[0].size(); }
    std::size_t quarters() const {
        return (id.empty() || id[0].scenarios.empty()) ? 0 : id[0].scenarios[0].size();
    }
    std::size_t n_da() const { return da.size(); }
    std::size_t n_id(std::size_t xi1) const { return id[xi1].size(); }

    double joint_prob(std::size_t xi1, std::size_t xi2) const {
        return da.probabilities[xi1] * id[xi1].probabilities[xi2];
    }

    std::size_t n_leaves() const {
        std::size_t n = 0;
        for (const auto& s : id) n += s.size();
        return n;
    }

    void validate() const {
        if (da.size() == 0 || id.size() != da.size())
            throw InputError("scenario tree needs one intraday set per day-ahead scenario");
        if (hours() * 4 != quarters())
            throw InputError("intraday scenarios must have 4 quarters per day-ahead hour");
        double p = 0;
        for (std::size_t a = 0; a < n_da(); ++a)
            for (std::size_t b = 0; b < n_id(a); ++b) p += joint_prob(a, b);
        if (std::fabs(p - 1.0) > 1e-9) throw InputError("scenario tree probabilities do not sum to 1");
    }
};

/// Independence coupling: every day-ahead scenario shares the same intraday set.
inline ScenarioTree build_tree(const ScenarioSet& da, const ScenarioSet& id) {
    ScenarioTree t;
    t.da = da;
    t.id.assign(da.size(), id);
    t.validate();
    return t;
}

/// Conditional coupling: row xi1 of `cond` gives the intraday probabilities under
/// day-ahead scenario xi1 (rows must be distributions over the intraday scenarios).
inline ScenarioTree build_tree(const ScenarioSet& da, const ScenarioSet& id,
                               const std::vector<std::vector<double>>& cond) {
    if (cond.size() != da.size()) throw InputError("conditional table needs one row per day-ahead scenario");
    ScenarioTree t;
    t.da = da;
    for (std::size_t a = 0; a < da.size(); ++a) {
        if (cond[a].size() != id.size())
            throw InputError("conditional table row width must match intraday scenario count");
        double s = 0;
        for (double p : cond[a]) {
            if (p < 0) throw InputError("conditional probabilities must be nonnegative");
            s += p;
        }
        if (std::fabs(s - 1.0) > 1e-9) throw InputError("conditional table row must sum to 1");
        ScenarioSet cs = id;
        cs.probabilities = cond[a];
        t.id.push_back(std::move(cs));
    }
    t.validate();
    return t;
}

}  // namespace chargebid
