#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chargebid/benders.hpp"
#include "chargebid/config.hpp"
#include "chargebid/csv.hpp"
#include "chargebid/evaluate.hpp"
#include "chargebid/oracle.hpp"
#include "chargebid/synthetic.hpp"

// End-to-end drivers behind the CLI subcommands. Every step reads its inputs from
// and writes its results to plain files in the configured output directory, so the
// steps can run in one process or as separate invocations. All numeric output goes
// through the shortest-round-trip formatter, which keeps repeated runs
// byte-identical.

namespace chargebid {

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    return cfg.output_dir + "/" + name;
}

inline void ensure_output_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw InputError("cannot create output directory " + cfg.output_dir);
}

// ---------------------------------------------------------------------------
// artifact writers/readers

inline void write_day_matrix(const std::string& path, const PriceMatrix& m,
                             const std::vector<std::string>& labels, char col_prefix) {
    std::ostringstream os;
    os << "day";
    for (std::size_t c = 0; c < m.cols; ++c) os << "," << col_prefix << c;
    os << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << (r < labels.size() ? labels[r] : std::to_string(r));
        for (std::size_t c = 0; c < m.cols; ++c) os << "," << csv::format_double(m.at(r, c));
        os << "\n";
    }
    csv::write_file(path, os.str());
}

inline PriceMatrix read_day_matrix(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.size() < 2) throw ParseError("no data rows in " + path);
    const std::size_t cols = csv::split(lines[0]).size() - 1;
    PriceMatrix m(cols);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != cols + 1) throw ParseError("bad row width in " + path, i + 1);
        std::vector<double> row;
        for (std::size_t c = 1; c < f.size(); ++c) row.push_back(csv::parse_double(f[c], i + 1));
        m.append_row(row);
    }
    return m;
}

inline void write_scenario_set(const std::string& path, const ScenarioSet& s, char col_prefix) {
    std::ostringstream os;
    os << "scenario,probability";
    const std::size_t n = s.scenarios.empty() ? 0 : s.scenarios[0].size();
    for (std::size_t c = 0; c < n; ++c) os << "," << col_prefix << c;
    os << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << i << "," << csv::format_double(s.probabilities[i]);
        for (double v : s.scenarios[i]) os << "," << csv::format_double(v);
        os << "\n";
    }
    csv::write_file(path, os.str());
}

inline ScenarioSet read_scenario_set(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.size() < 2) throw ParseError("no scenarios in " + path);
    ScenarioSet s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() < 3) throw ParseError("bad scenario row in " + path, i + 1);
        s.probabilities.push_back(csv::parse_double(f[1], i + 1));
        std::vector<double> v;
        for (std::size_t c = 2; c < f.size(); ++c) v.push_back(csv::parse_double(f[c], i + 1));
        s.scenarios.push_back(std::move(v));
    }
    return s;
}

inline void write_loads_csv(const std::string& path, const LoadProfile& lp) {
    std::ostringstream os;
    os << "quarter,electricity_kwh,hydrogen_kg\n";
    for (std::size_t t = 0; t < lp.quarters(); ++t)
        os << t << "," << csv::format_double(lp.electricity_kwh[t]) << ","
           << csv::format_double(lp.hydrogen_kg[t]) << "\n";
    csv::write_file(path, os.str());
}

inline void write_da_curves(const std::string& path, const std::vector<BidCurve>& curves) {
    std::ostringstream os;
    os << "hour,price_eur_mwh,volume_kwh\n";
    for (std::size_t h = 0; h < curves.size(); ++h)
        for (std::size_t i = 0; i < curves[h].grid.size(); ++i)
            os << h << "," << csv::format_double(curves[h].grid.steps[i]) << ","
               << csv::format_double(curves[h].volumes[i]) << "\n";
    csv::write_file(path, os.str());
}

inline void write_id_curves(const std::string& path,
                            const std::vector<std::vector<BidCurve>>& curves) {
    std::ostringstream os;
    os << "da_scenario,quarter,price_eur_mwh,volume_kwh\n";
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t t = 0; t < curves[a].size(); ++t)
            for (std::size_t i = 0; i < curves[a][t].grid.size(); ++i)
                os << a << "," << t << "," << csv::format_double(curves[a][t].grid.steps[i])
                   << "," << csv::format_double(curves[a][t].volumes[i]) << "\n";
    csv::write_file(path, os.str());
}

namespace detail {

/// Groups rows keyed by leading integer columns and rebuilds per-key curves.
inline std::map<std::vector<long>, BidCurve> read_curve_rows(const std::string& path,
                                                             std::size_t key_cols) {
    const auto lines = csv::read_lines(path);
    if (lines.size() < 2) throw ParseError("no curve rows in " + path);
    std::map<std::vector<long>, BidCurve> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != key_cols + 2) throw ParseError("bad curve row in " + path, i + 1);
        std::vector<long> key;
        for (std::size_t c = 0; c < key_cols; ++c) key.push_back(csv::parse_long(f[c], i + 1));
        BidCurve& c = out[key];
        c.grid.steps.push_back(csv::parse_double(f[key_cols], i + 1));
        c.volumes.push_back(csv::parse_double(f[key_cols + 1], i + 1));
    }
    for (auto& [key, c] : out) c.validate();
    return out;
}

}  // namespace detail

inline std::vector<BidCurve> read_da_curves(const std::string& path) {
    auto rows = detail::read_curve_rows(path, 1);
    std::vector<BidCurve> curves;
    for (auto& [key, c] : rows) {
        if (key[0] != static_cast<long>(curves.size()))
            throw ParseError("hours must be contiguous in " + path);
        curves.push_back(std::move(c));
    }
    return curves;
}

inline std::vector<std::vector<BidCurve>> read_id_curves(const std::string& path) {
    auto rows = detail::read_curve_rows(path, 2);
    std::vector<std::vector<BidCurve>> curves;
    for (auto& [key, c] : rows) {
        if (key[0] >= static_cast<long>(curves.size())) curves.resize(key[0] + 1);
        auto& fam = curves[static_cast<std::size_t>(key[0])];
        if (key[1] != static_cast<long>(fam.size()))
            throw ParseError("quarters must be contiguous in " + path);
        fam.push_back(std::move(c));
    }
    return curves;
}

inline void write_da_volumes(const std::string& path,
                             const std::vector<std::vector<double>>& md) {
    std::ostringstream os;
    os << "da_scenario,quarter,m_d_kwh\n";
    for (std::size_t a = 0; a < md.size(); ++a)
        for (std::size_t t = 0; t < md[a].size(); ++t)
            os << a << "," << t << "," << csv::format_double(md[a][t]) << "\n";
    csv::write_file(path, os.str());
}

inline std::vector<std::vector<double>> read_da_volumes(const std::string& path) {
    const auto lines = csv::read_lines(path);
    std::vector<std::vector<double>> md;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != 3) throw ParseError("bad volume row in " + path, i + 1);
        const auto a = static_cast<std::size_t>(csv::parse_long(f[0], i + 1));
        const auto t = static_cast<std::size_t>(csv::parse_long(f[1], i + 1));
        if (a >= md.size()) md.resize(a + 1);
        if (t >= md[a].size()) md[a].resize(t + 1, 0.0);
        md[a][t] = csv::parse_double(f[2], i + 1);
    }
    return md;
}

inline void write_schedules(const std::string& path, const ScenarioTree& tree,
                            const std::vector<Schedule>& schedules) {
    std::ostringstream os;
    os << "da_scenario,id_scenario,quarter,m_i_kwh,v_e_kwh,b_c_kwh,b_d_kwh,b_l_kwh,e_p_kwh,"
          "v_h_kg,h_c_kg,h_d_kg,h_l_kg\n";
    std::size_t leaf = 0;
    for (std::size_t a = 0; a < tree.n_da(); ++a) {
        for (std::size_t b = 0; b < tree.n_id(a); ++b, ++leaf) {
            const Schedule& s = schedules[leaf];
            for (std::size_t t = 0; t < s.m_i.size(); ++t) {
                os << a << "," << b << "," << t;
                for (double v : {s.m_i[t], s.v_e[t], s.b_c[t], s.b_d[t], s.b_l[t], s.e_p[t],
                                 s.v_h[t], s.h_c[t], s.h_d[t], s.h_l[t]})
                    os << "," << csv::format_double(v);
                os << "\n";
            }
        }
    }
    csv::write_file(path, os.str());
}

inline std::vector<Schedule> read_schedules(const std::string& path, const ScenarioTree& tree) {
    const auto lines = csv::read_lines(path);
    std::vector<Schedule> out(tree.n_leaves());
    for (auto& s : out) {
        s.m_i.assign(tree.quarters(), 0.0);
        s.v_e.assign(tree.quarters(), 0.0);
        s.b_c.assign(tree.quarters(), 0.0);
        s.b_d.assign(tree.quarters(), 0.0);
        s.b_l.assign(tree.quarters(), 0.0);
        s.e_p.assign(tree.quarters(), 0.0);
        s.v_h.assign(tree.quarters(), 0.0);
        s.h_c.assign(tree.quarters(), 0.0);
        s.h_d.assign(tree.quarters(), 0.0);
        s.h_l.assign(tree.quarters(), 0.0);
    }
    std::vector<int> leaf_base(tree.n_da(), 0);
    for (std::size_t a = 1; a < tree.n_da(); ++a)
        leaf_base[a] = leaf_base[a - 1] + static_cast<int>(tree.n_id(a - 1));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != 13) throw ParseError("bad schedule row in " + path, i + 1);
        const auto a = static_cast<std::size_t>(csv::parse_long(f[0], i + 1));
        const auto b = static_cast<std::size_t>(csv::parse_long(f[1], i + 1));
        const auto t = static_cast<std::size_t>(csv::parse_long(f[2], i + 1));
        if (a >= tree.n_da() || b >= tree.n_id(a) || t >= tree.quarters())
            throw ParseError("schedule row outside the scenario tree in " + path, i + 1);
        Schedule& s = out[static_cast<std::size_t>(leaf_base[a]) + b];
        s.m_i[t] = csv::parse_double(f[3], i + 1);
        s.v_e[t] = csv::parse_double(f[4], i + 1);
        s.b_c[t] = csv::parse_double(f[5], i + 1);
        s.b_d[t] = csv::parse_double(f[6], i + 1);
        s.b_l[t] = csv::parse_double(f[7], i + 1);
        s.e_p[t] = csv::parse_double(f[8], i + 1);
        s.v_h[t] = csv::parse_double(f[9], i + 1);
        s.h_c[t] = csv::parse_double(f[10], i + 1);
        s.h_d[t] = csv::parse_double(f[11], i + 1);
        s.h_l[t] = csv::parse_double(f[12], i + 1);
    }
    return out;
}

inline void write_json_file(const std::string& path, const json& j) {
    csv::write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// subcommand drivers

struct IngestOutcome {
    PriceMatrix da, id;
    std::vector<std::string> da_days, id_days;
    std::size_t da_dropped = 0, id_dropped = 0;
    std::size_t da_outliers = 0, id_outliers = 0;
};

/// Reads (or synthesizes) raw prices, removes outlier days, applies confidence
/// trimming, and writes the cleaned day matrices.
inline IngestOutcome run_ingest(const RunConfig& cfg) {
    ensure_output_dir(cfg);
    IngestOutcome out;
    if (!cfg.da_csv.empty() || !cfg.id_csv.empty()) {
        if (cfg.da_csv.empty() || cfg.id_csv.empty())
            throw InputError("either both price files or neither must be given");
        IngestResult da = ingest_prices_file(cfg.da_csv, Market::DayAhead);
        IngestResult id = ingest_prices_file(cfg.id_csv, Market::Intraday);
        out.da = std::move(da.prices);
        out.id = std::move(id.prices);
        out.da_days = std::move(da.dates);
        out.id_days = std::move(id.dates);
        out.da_dropped = da.dropped_days;
        out.id_dropped = id.dropped_days;
    } else {
        SyntheticPriceOptions so;
        so.days = cfg.synthetic_days;
        so.seed = cfg.synthetic_seed;
        out.da = synthetic_prices(Market::DayAhead, so);
        out.id = synthetic_prices(Market::Intraday, so);
    }

    // A horizon shorter than the trading day keeps only its leading intervals; the
    // whole downstream chain then works on that sub-day.
    if (cfg.horizon_hours < 24) {
        auto truncate = [](const PriceMatrix& m, std::size_t keep) {
            PriceMatrix t(keep);
            for (std::size_t r = 0; r < m.rows(); ++r) {
                std::vector<double> row;
                for (std::size_t c = 0; c < keep; ++c) row.push_back(m.at(r, c));
                t.append_row(row);
            }
            return t;
        };
        out.da = truncate(out.da, static_cast<std::size_t>(cfg.horizon_hours));
        out.id = truncate(out.id, static_cast<std::size_t>(4 * cfg.horizon_hours));
    }

    const std::size_t da_before = out.da.rows(), id_before = out.id.rows();
    out.da = zscore_filter(out.da, cfg.zscore_threshold, cfg.zscore_per_column);
    out.id = zscore_filter(out.id, cfg.zscore_threshold, cfg.zscore_per_column);
    out.da_outliers = da_before - out.da.rows();
    out.id_outliers = id_before - out.id.rows();
    if (cfg.confidence_epsilon > 0.0) {
        out.da = trim_confidence(out.da, cfg.confidence_epsilon);
        out.id = trim_confidence(out.id, cfg.confidence_epsilon);
    }

    write_day_matrix(out_path(cfg, "clean_da.csv"), out.da, out.da_days, 'h');
    write_day_matrix(out_path(cfg, "clean_id.csv"), out.id, out.id_days, 'q');
    write_json_file(out_path(cfg, "ingest.json"),
                    json{{"da_days", out.da.rows()},
                         {"id_days", out.id.rows()},
                         {"da_days_dropped_incomplete", out.da_dropped},
                         {"id_days_dropped_incomplete", out.id_dropped},
                         {"da_days_removed_outlier", out.da_outliers},
                         {"id_days_removed_outlier", out.id_outliers},
                         {"zscore_threshold", cfg.zscore_threshold},
                         {"zscore_per_column", cfg.zscore_per_column},
                         {"confidence_epsilon", cfg.confidence_epsilon}});
    return out;
}

struct ScenarioOutcome {
    ScenarioSet da, id;
    ScenarioTree tree;
    double j_da = 0.0, j_id = 0.0;
};

inline ScenarioOutcome reduce_scenarios(const RunConfig& cfg, const PriceMatrix& da,
                                        const PriceMatrix& id) {
    ScenarioOutcome out;
    const KmeansResult km_da = kmeans(da, static_cast<std::size_t>(cfg.k_da), cfg.scenario_seed,
                                      static_cast<std::size_t>(cfg.kmeans_max_iter));
    const KmeansResult km_id = kmeans(id, static_cast<std::size_t>(cfg.k_id),
                                      derive_seed(cfg.scenario_seed, 1),
                                      static_cast<std::size_t>(cfg.kmeans_max_iter));
    out.da = make_scenario_set(km_da);
    out.id = make_scenario_set(km_id);
    out.j_da = km_da.j_history.back();
    out.j_id = km_id.j_history.back();
    out.tree = build_tree(out.da, out.id);
    return out;
}

inline ScenarioOutcome run_scenarios(const RunConfig& cfg) {
    const PriceMatrix da = read_day_matrix(out_path(cfg, "clean_da.csv"));
    const PriceMatrix id = read_day_matrix(out_path(cfg, "clean_id.csv"));
    ScenarioOutcome out = reduce_scenarios(cfg, da, id);
    write_scenario_set(out_path(cfg, "scenarios_da.csv"), out.da, 'h');
    write_scenario_set(out_path(cfg, "scenarios_id.csv"), out.id, 'q');
    write_json_file(out_path(cfg, "scenarios.json"),
                    json{{"k_da", cfg.k_da},
                         {"k_id", cfg.k_id},
                         {"da_scenarios", out.da.size()},
                         {"id_scenarios", out.id.size()},
                         {"da_within_cluster_ss", out.j_da},
                         {"id_within_cluster_ss", out.j_id},
                         {"seed", cfg.scenario_seed}});
    return out;
}

inline ScenarioTree load_scenario_tree(const RunConfig& cfg) {
    return build_tree(read_scenario_set(out_path(cfg, "scenarios_da.csv")),
                      read_scenario_set(out_path(cfg, "scenarios_id.csv")));
}

inline LoadProfile pipeline_loads(const RunConfig& cfg, std::size_t quarters) {
    LoadProfile lp = cfg.loads_csv.empty() ? synthetic_loads(static_cast<int>(quarters))
                                           : load_loads_csv(cfg.loads_csv);
    if (lp.quarters() != quarters)
        throw InputError("load profile has " + std::to_string(lp.quarters()) +
                         " quarters but the scenario horizon has " + std::to_string(quarters));
    return lp;
}

inline MarketGrids grids_for_tree(const RunConfig& cfg, const ScenarioTree& tree) {
    std::vector<double> da_prices, id_prices;
    for (const auto& s : tree.da.scenarios) da_prices.insert(da_prices.end(), s.begin(), s.end());
    for (const auto& set : tree.id)
        for (const auto& s : set.scenarios) id_prices.insert(id_prices.end(), s.begin(), s.end());
    MarketGrids g;
    g.da = grid_covering(da_prices, static_cast<std::size_t>(cfg.da_grid_steps));
    g.id = grid_covering(id_prices, static_cast<std::size_t>(cfg.id_grid_steps));
    return g;
}

struct SolveOutcome {
    BendersResult result;
    PolicyBundle bundle;
    MarketGrids grids;
    double wall_ms = 0.0;
};

inline BendersOptions benders_options(const RunConfig& cfg) {
    BendersOptions bo;
    bo.max_iters = cfg.benders_max_iters;
    bo.eps = cfg.benders_epsilon;
    bo.sddp.stages = cfg.stages;
    bo.sddp.max_iters = cfg.sddp_max_iters;
    bo.sddp.eps = cfg.sddp_epsilon;
    bo.sddp.forward_samples = cfg.forward_samples;
    bo.sddp.sample_size = cfg.sample_size;
    bo.sddp.seed = cfg.scenario_seed;
    return bo;
}

inline SolveOutcome solve_from_tree(const RunConfig& cfg, const ScenarioTree& tree,
                                    const LoadProfile& loads) {
    SolveOutcome out;
    out.grids = grids_for_tree(cfg, tree);
    check_load_serviceable(cfg.station, loads);
    const auto t0 = std::chrono::steady_clock::now();
    out.result = solve_benders(cfg.station, loads, tree, out.grids, benders_options(cfg));
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    out.bundle.spec = cfg.station;
    out.bundle.loads = loads;
    out.bundle.tree = tree;
    out.bundle.curves = out.result.curves;
    out.bundle.m_d = out.result.m_d;
    out.bundle.schedules = out.result.schedules;
    out.bundle.in_sample_objective = out.result.objective;
    return out;
}

inline SolveOutcome run_solve(const RunConfig& cfg) {
    const ScenarioTree tree = load_scenario_tree(cfg);
    const LoadProfile loads = pipeline_loads(cfg, tree.quarters());
    SolveOutcome out = solve_from_tree(cfg, tree, loads);
    const BendersResult& r = out.result;

    write_loads_csv(out_path(cfg, "loads_used.csv"), loads);
    write_da_curves(out_path(cfg, "bidding_curves_da.csv"), r.curves.da);
    write_id_curves(out_path(cfg, "bidding_curves_id.csv"), r.curves.id);
    write_da_volumes(out_path(cfg, "da_volumes.csv"), r.m_d);
    write_schedules(out_path(cfg, "schedule.csv"), tree, r.schedules);
    {
        std::ostringstream os;
        os << "iteration,upper_eur,lower_eur,gap_eur\n";
        for (const auto& row : r.trace)
            os << row.iteration << "," << csv::format_double(row.upper) << ","
               << csv::format_double(row.lower) << "," << csv::format_double(row.gap) << "\n";
        csv::write_file(out_path(cfg, "convergence.csv"), os.str());
    }
    {
        std::ostringstream os;
        os << "benders_iteration,group,sddp_iteration,sample,z_bar,z,sigma\n";
        for (const auto& row : r.sddp_trace)
            os << row.benders_iteration << "," << row.group << "," << row.row.iteration << ","
               << row.row.sample << "," << csv::format_double(row.row.z_bar) << ","
               << csv::format_double(row.row.z) << "," << csv::format_double(row.row.sigma)
               << "\n";
        csv::write_file(out_path(cfg, "sddp_trace.csv"), os.str());
    }
    json rep{{"converged", r.converged},
             {"iterations", r.iterations},
             {"objective_eur", r.objective},
             {"upper_bound_eur", r.upper_bound},
             {"lower_bound_eur", r.lower_bound},
             {"relative_gap",
              (r.upper_bound - r.lower_bound) / std::max(1.0, std::fabs(r.upper_bound))},
             {"hours", tree.hours()},
             {"quarters", tree.quarters()},
             {"da_scenarios", tree.n_da()},
             {"leaves", tree.n_leaves()},
             {"negative_price_warning", r.negative_price_warning},
             {"initial_battery_value_eur_per_kwh", r.init_b_dual},
             {"initial_tank_value_eur_per_kg", r.init_h_dual}};
    if (cfg.emit_timings) rep["timings_ms"] = json{{"solve", out.wall_ms}};
    write_json_file(out_path(cfg, "report.json"), rep);
    return out;
}

inline PolicyBundle load_bundle(const RunConfig& cfg) {
    PolicyBundle pb;
    pb.spec = cfg.station;
    pb.tree = load_scenario_tree(cfg);
    pb.loads = load_loads_csv(out_path(cfg, "loads_used.csv"));
    pb.curves.da = read_da_curves(out_path(cfg, "bidding_curves_da.csv"));
    pb.curves.id = read_id_curves(out_path(cfg, "bidding_curves_id.csv"));
    pb.m_d = read_da_volumes(out_path(cfg, "da_volumes.csv"));
    pb.schedules = read_schedules(out_path(cfg, "schedule.csv"), pb.tree);
    const json rep = load_json_file(out_path(cfg, "report.json"));
    pb.in_sample_objective = detail::get_or(rep, "objective_eur", 0.0);
    pb.validate();
    return pb;
}

inline McOptions mc_options(const RunConfig& cfg) {
    McOptions mo;
    mo.draws = cfg.eval_draws;
    mo.seed = cfg.eval_seed;
    mo.replay = cfg.eval_mode == "replay";
    mo.threads = cfg.eval_threads;
    mo.histogram_bins = cfg.histogram_bins;
    return mo;
}

inline McReport run_evaluate(const RunConfig& cfg) {
    const PolicyBundle pb = load_bundle(cfg);
    const NormalSampler sampler(read_day_matrix(out_path(cfg, "clean_da.csv")),
                                read_day_matrix(out_path(cfg, "clean_id.csv")), cfg.eval_seed);
    const McReport rep = monte_carlo(pb, sampler, mc_options(cfg));

    {
        std::ostringstream os;
        os << "draw,profit_eur\n";
        for (std::size_t i = 0; i < rep.profits.size(); ++i)
            os << i << "," << csv::format_double(rep.profits[i]) << "\n";
        csv::write_file(out_path(cfg, "mc_draws.csv"), os.str());
    }
    {
        std::ostringstream os;
        os << "bin_lo_eur,bin_hi_eur,count\n";
        for (const auto& b : rep.histogram)
            os << csv::format_double(b.lo) << "," << csv::format_double(b.hi) << "," << b.count
               << "\n";
        csv::write_file(out_path(cfg, "histogram.csv"), os.str());
    }
    write_json_file(out_path(cfg, "evaluation.json"),
                    json{{"draws", rep.profits.size()},
                         {"mode", cfg.eval_mode},
                         {"mean_eur", rep.mean},
                         {"variance", rep.variance},
                         {"p5", rep.p5},
                         {"p25", rep.p25},
                         {"p50", rep.p50},
                         {"p75", rep.p75},
                         {"p95", rep.p95},
                         {"clipped_prices", rep.clipped_prices},
                         {"in_sample_objective_eur", pb.in_sample_objective}});
    return rep;
}

/// Re-solves with one station parameter scaled through the given multipliers.
struct SweepRow {
    std::string parameter;
    double multiplier = 1.0;
    double objective_eur = 0.0;
    bool converged = false;
};

inline std::vector<SweepRow> sensitivity_sweep(const RunConfig& cfg, const ScenarioTree& tree,
                                               const LoadProfile& loads,
                                               const std::string& parameter,
                                               const std::vector<double>& multipliers) {
    std::vector<SweepRow> rows;
    for (double m : multipliers) {
        RunConfig c = cfg;
        if (parameter == "lambda_e") c.station.lambda_e_eur_kwh *= m;
        else if (parameter == "lambda_h") c.station.lambda_h_eur_kg *= m;
        else if (parameter == "b_level_max") c.station.b_level_max_kwh *= m;
        else if (parameter == "h_level_max") c.station.h_level_max_kg *= m;
        else if (parameter == "e_power_max") c.station.e_power_max_kw *= m;
        else throw InputError("unknown sweep parameter '" + parameter + "'");
        const SolveOutcome so = solve_from_tree(c, tree, loads);
        rows.push_back({parameter, m, so.result.objective, so.result.converged});
    }
    return rows;
}

/// For each trimming level: clean + trim, reduce, solve, then evaluate against a
/// sampler fitted to the untrimmed data. Returns one row per level.
struct ConfidenceRow {
    double epsilon = 0.0;
    double in_sample_eur = 0.0;
    double mc_mean_eur = 0.0;
    double mc_variance = 0.0;
};

inline std::vector<ConfidenceRow> confidence_study(const RunConfig& cfg, const PriceMatrix& da,
                                                   const PriceMatrix& id,
                                                   const std::vector<double>& epsilons) {
    std::vector<ConfidenceRow> rows;
    for (double eps : epsilons) {
        RunConfig c = cfg;
        c.confidence_epsilon = eps;
        const PriceMatrix tda = eps > 0 ? trim_confidence(da, eps) : da;
        const PriceMatrix tid = eps > 0 ? trim_confidence(id, eps) : id;
        const ScenarioOutcome scen = reduce_scenarios(c, tda, tid);
        const LoadProfile loads = pipeline_loads(c, scen.tree.quarters());
        const SolveOutcome so = solve_from_tree(c, scen.tree, loads);
        const NormalSampler sampler(da, id, c.eval_seed);
        const McReport mc = monte_carlo(so.bundle, sampler, mc_options(c));
        rows.push_back({eps, so.result.objective, mc.mean, mc.variance});
    }
    return rows;
}

inline json run_oracle(const RunConfig& cfg) {
    const ScenarioTree tree = load_scenario_tree(cfg);
    const LoadProfile loads = pipeline_loads(cfg, tree.quarters());
    const MarketGrids grids = grids_for_tree(cfg, tree);
    OracleOptions oo;
    oo.max_size = cfg.oracle_max_size;
    oo.force = cfg.oracle_force;
    const OracleResult res = solve_extensive(cfg.station, loads, tree, grids, oo);
    const ExclusivityCheck chk =
        verify_storage_exclusivity(cfg.station, loads, tree, grids, oo);
    json rep{{"objective_eur", res.objective},
             {"size_measure", res.size_measure},
             {"lp_iterations", res.solution.iterations},
             {"max_primal_residual", res.solution.max_residual},
             {"duality_gap", res.solution.dual_gap},
             {"exclusivity",
              json{{"max_battery_product", chk.max_battery_product},
                   {"max_tank_product", chk.max_tank_product},
                   {"lp_objective_eur", chk.lp_objective},
                   {"mip_objective_eur", chk.mip_objective},
                   {"relative_gap", chk.relative_gap},
                   {"nodes", chk.mip_nodes},
                   {"ok", chk.ok}}}};
    const std::string solve_report = out_path(cfg, "report.json");
    if (std::filesystem::exists(solve_report)) {
        const json sj = load_json_file(solve_report);
        const double dec = detail::get_or(sj, "objective_eur", 0.0);
        rep["decomposition_objective_eur"] = dec;
        rep["decomposition_vs_oracle_relative"] =
            std::fabs(dec - res.objective) / std::max(1.0, std::fabs(res.objective));
    }
    write_json_file(out_path(cfg, "oracle.json"), rep);
    return rep;
}

/// Markdown digest of whatever artifacts exist in the output directory.
inline std::string run_report(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# Run summary\n";
    const auto maybe = [&](const std::string& name) -> json {
        const std::string p = out_path(cfg, name);
        if (!std::filesystem::exists(p)) return json();
        return load_json_file(p);
    };
    if (const json j = maybe("ingest.json"); !j.is_null()) {
        os << "\n## Data\n"
           << "- day-ahead days: " << j.value("da_days", 0) << " (dropped "
           << j.value("da_days_dropped_incomplete", 0) << " incomplete, removed "
           << j.value("da_days_removed_outlier", 0) << " outliers)\n"
           << "- intraday days: " << j.value("id_days", 0) << " (dropped "
           << j.value("id_days_dropped_incomplete", 0) << " incomplete, removed "
           << j.value("id_days_removed_outlier", 0) << " outliers)\n";
    }
    if (const json j = maybe("scenarios.json"); !j.is_null()) {
        os << "\n## Scenarios\n"
           << "- day-ahead: " << j.value("da_scenarios", 0) << ", intraday: "
           << j.value("id_scenarios", 0) << "\n";
    }
    if (const json j = maybe("report.json"); !j.is_null()) {
        os << "\n## Solve\n"
           << "- objective: " << csv::format_double(j.value("objective_eur", 0.0)) << " EUR\n"
           << "- bounds: [" << csv::format_double(j.value("lower_bound_eur", 0.0)) << ", "
           << csv::format_double(j.value("upper_bound_eur", 0.0)) << "]\n"
           << "- converged: " << (j.value("converged", false) ? "yes" : "no") << " in "
           << j.value("iterations", 0) << " iterations\n";
    }
    if (const json j = maybe("evaluation.json"); !j.is_null()) {
        os << "\n## Evaluation\n"
           << "- draws: " << j.value("draws", 0) << ", mean profit: "
           << csv::format_double(j.value("mean_eur", 0.0)) << " EUR, variance: "
           << csv::format_double(j.value("variance", 0.0)) << "\n";
    }
    if (const json j = maybe("oracle.json"); !j.is_null()) {
        os << "\n## Oracle\n"
           << "- extensive objective: " << csv::format_double(j.value("objective_eur", 0.0))
           << " EUR\n";
        if (j.contains("decomposition_vs_oracle_relative"))
            os << "- decomposition agreement: "
               << csv::format_double(j.value("decomposition_vs_oracle_relative", 0.0))
               << " relative\n";
    }
    const std::string text = os.str();
    csv::write_file(out_path(cfg, "summary.md"), text);
    return text;
}

}  // namespace chargebid
