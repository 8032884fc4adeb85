#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "chargebid/csv.hpp"
#include "chargebid/errors.hpp"
#include "chargebid/station.hpp"

// Run configuration: one JSON file drives every subcommand; command-line flags
// override individual fields. Unknown top-level keys are rejected to catch typos.

namespace chargebid {

using json = nlohmann::json;

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T def) {
    if (!j.is_object() || !j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config key '") + key + "': " + e.what());
    }
}

// A key in the wrong section would otherwise be silently ignored and the
// default used instead, which is far harder to notice than a hard error.
inline void check_keys(const json& j, const char* section,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) return;
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok)
            throw InputError("unknown key '" + key + "' in config section '" + section + "'");
    }
}

}  // namespace detail

struct RunConfig {
    // data sources; empty paths mean "use the synthetic generator"
    std::string da_csv, id_csv, loads_csv;
    int synthetic_days = 60;
    std::uint64_t synthetic_seed = 42;
    int horizon_hours = 24;  // < 24 keeps only the leading hours of each trading day

    // cleaning
    double zscore_threshold = 3.0;
    bool zscore_per_column = false;
    double confidence_epsilon = 0.0;

    // scenario reduction
    int k_da = 4, k_id = 4;
    std::uint64_t scenario_seed = 1;
    int kmeans_max_iter = 100;

    // bid grids
    int da_grid_steps = 10, id_grid_steps = 10;

    // solver
    int benders_max_iters = 60;
    double benders_epsilon = 1e-5;
    int stages = 8;
    int sddp_max_iters = 40;
    double sddp_epsilon = 1e-7;
    int forward_samples = 5;
    int sample_size = 0;
    bool uniform_da = true;

    // evaluation
    int eval_draws = 500;
    std::uint64_t eval_seed = 7;
    std::string eval_mode = "reoptimize";  // or "replay"
    int eval_threads = 1;
    int histogram_bins = 20;

    // oracle
    long oracle_max_size = 2500;
    bool oracle_force = false;

    StationSpec station;
    std::string output_dir = "out";
    bool emit_timings = false;

    void validate() const {
        station.validate();
        if (k_da < 1 || k_id < 1) throw InputError("scenario counts must be >= 1");
        if (horizon_hours < 1 || horizon_hours > 24) throw InputError("horizon must be 1..24 hours");
        if (da_grid_steps < 2 || id_grid_steps < 2) throw InputError("grids need at least 2 steps");
        if (stages < 1) throw InputError("stage count must be >= 1");
        if (benders_max_iters < 1 || sddp_max_iters < 1) throw InputError("iteration caps must be >= 1");
        if (benders_epsilon <= 0 || sddp_epsilon <= 0) throw InputError("tolerances must be positive");
        if (eval_draws < 1) throw InputError("evaluation needs at least one draw");
        if (eval_mode != "reoptimize" && eval_mode != "replay")
            throw InputError("evaluation mode must be 'reoptimize' or 'replay'");
        if (eval_threads < 1) throw InputError("thread count must be >= 1");
        if (output_dir.empty()) throw InputError("output directory must be set");
    }
};

inline StationSpec station_from_json(const json& j) {
    detail::check_keys(j, "station",
                       {"eta_b", "eta_h", "eta_e", "hv_kwh_per_kg", "b_level_max_kwh",
                        "b_charge_max_kw", "b_discharge_max_kw", "h_level_max_kg",
                        "h_inject_max_kg_h", "h_withdraw_max_kg_h", "e_power_max_kw",
                        "b_init_kwh", "h_init_kg", "lambda_e_eur_kwh", "lambda_h_eur_kg"});
    StationSpec s;
    s.eta_b = detail::get_or(j, "eta_b", s.eta_b);
    s.eta_h = detail::get_or(j, "eta_h", s.eta_h);
    s.eta_e = detail::get_or(j, "eta_e", s.eta_e);
    s.hv_kwh_per_kg = detail::get_or(j, "hv_kwh_per_kg", s.hv_kwh_per_kg);
    s.b_level_max_kwh = detail::get_or(j, "b_level_max_kwh", s.b_level_max_kwh);
    s.b_charge_max_kw = detail::get_or(j, "b_charge_max_kw", s.b_charge_max_kw);
    s.b_discharge_max_kw = detail::get_or(j, "b_discharge_max_kw", s.b_discharge_max_kw);
    s.h_level_max_kg = detail::get_or(j, "h_level_max_kg", s.h_level_max_kg);
    s.h_inject_max_kg_h = detail::get_or(j, "h_inject_max_kg_h", s.h_inject_max_kg_h);
    s.h_withdraw_max_kg_h = detail::get_or(j, "h_withdraw_max_kg_h", s.h_withdraw_max_kg_h);
    s.e_power_max_kw = detail::get_or(j, "e_power_max_kw", s.e_power_max_kw);
    s.b_init_kwh = detail::get_or(j, "b_init_kwh", s.b_init_kwh);
    s.h_init_kg = detail::get_or(j, "h_init_kg", s.h_init_kg);
    s.lambda_e_eur_kwh = detail::get_or(j, "lambda_e_eur_kwh", s.lambda_e_eur_kwh);
    s.lambda_h_eur_kg = detail::get_or(j, "lambda_h_eur_kg", s.lambda_h_eur_kg);
    s.validate();
    return s;
}

inline json station_to_json(const StationSpec& s) {
    return json{{"eta_b", s.eta_b},
                {"eta_h", s.eta_h},
                {"eta_e", s.eta_e},
                {"hv_kwh_per_kg", s.hv_kwh_per_kg},
                {"b_level_max_kwh", s.b_level_max_kwh},
                {"b_charge_max_kw", s.b_charge_max_kw},
                {"b_discharge_max_kw", s.b_discharge_max_kw},
                {"h_level_max_kg", s.h_level_max_kg},
                {"h_inject_max_kg_h", s.h_inject_max_kg_h},
                {"h_withdraw_max_kg_h", s.h_withdraw_max_kg_h},
                {"e_power_max_kw", s.e_power_max_kw},
                {"b_init_kwh", s.b_init_kwh},
                {"h_init_kg", s.h_init_kg},
                {"lambda_e_eur_kwh", s.lambda_e_eur_kwh},
                {"lambda_h_eur_kg", s.lambda_h_eur_kg}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("bad JSON in " + path + ": " + e.what());
    }
}

inline RunConfig parse_run_config(const json& j, const std::string& base_dir = "") {
    static const std::set<std::string> known{"data",     "clean",  "scenario", "grids",
                                            "solver",   "evaluate", "oracle", "station",
                                            "station_file", "output_dir", "emit_timings"};
    if (!j.is_object()) throw InputError("run config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InputError("unknown config key '" + key + "'");

    auto resolve = [&](std::string p) {
        if (p.empty() || p.front() == '/' || base_dir.empty()) return p;
        return base_dir + "/" + p;
    };

    RunConfig c;
    const json data = detail::get_or(j, "data", json::object());
    detail::check_keys(data, "data",
                       {"da_csv", "id_csv", "loads_csv", "synthetic_days", "synthetic_seed",
                        "horizon_hours"});
    c.da_csv = resolve(detail::get_or<std::string>(data, "da_csv", ""));
    c.id_csv = resolve(detail::get_or<std::string>(data, "id_csv", ""));
    c.loads_csv = resolve(detail::get_or<std::string>(data, "loads_csv", ""));
    c.synthetic_days = detail::get_or(data, "synthetic_days", c.synthetic_days);
    c.synthetic_seed = detail::get_or(data, "synthetic_seed", c.synthetic_seed);
    c.horizon_hours = detail::get_or(data, "horizon_hours", c.horizon_hours);

    const json clean = detail::get_or(j, "clean", json::object());
    detail::check_keys(clean, "clean", {"zscore_threshold", "per_column", "confidence_epsilon"});
    c.zscore_threshold = detail::get_or(clean, "zscore_threshold", c.zscore_threshold);
    c.zscore_per_column = detail::get_or(clean, "per_column", c.zscore_per_column);
    c.confidence_epsilon = detail::get_or(clean, "confidence_epsilon", c.confidence_epsilon);

    const json scen = detail::get_or(j, "scenario", json::object());
    detail::check_keys(scen, "scenario", {"k_da", "k_id", "seed", "max_iter"});
    c.k_da = detail::get_or(scen, "k_da", c.k_da);
    c.k_id = detail::get_or(scen, "k_id", c.k_id);
    c.scenario_seed = detail::get_or(scen, "seed", c.scenario_seed);
    c.kmeans_max_iter = detail::get_or(scen, "max_iter", c.kmeans_max_iter);

    const json grids = detail::get_or(j, "grids", json::object());
    detail::check_keys(grids, "grids", {"da_steps", "id_steps"});
    c.da_grid_steps = detail::get_or(grids, "da_steps", c.da_grid_steps);
    c.id_grid_steps = detail::get_or(grids, "id_steps", c.id_grid_steps);

    const json solver = detail::get_or(j, "solver", json::object());
    detail::check_keys(solver, "solver",
                       {"benders_max_iters", "benders_epsilon", "stages", "sddp_max_iters",
                        "sddp_epsilon", "forward_samples", "sample_size", "uniform_da"});
    c.benders_max_iters = detail::get_or(solver, "benders_max_iters", c.benders_max_iters);
    c.benders_epsilon = detail::get_or(solver, "benders_epsilon", c.benders_epsilon);
    c.stages = detail::get_or(solver, "stages", c.stages);
    c.sddp_max_iters = detail::get_or(solver, "sddp_max_iters", c.sddp_max_iters);
    c.sddp_epsilon = detail::get_or(solver, "sddp_epsilon", c.sddp_epsilon);
    c.forward_samples = detail::get_or(solver, "forward_samples", c.forward_samples);
    c.sample_size = detail::get_or(solver, "sample_size", c.sample_size);
    c.uniform_da = detail::get_or(solver, "uniform_da", c.uniform_da);

    const json ev = detail::get_or(j, "evaluate", json::object());
    detail::check_keys(ev, "evaluate", {"draws", "seed", "mode", "threads", "histogram_bins"});
    c.eval_draws = detail::get_or(ev, "draws", c.eval_draws);
    c.eval_seed = detail::get_or(ev, "seed", c.eval_seed);
    c.eval_mode = detail::get_or<std::string>(ev, "mode", c.eval_mode);
    c.eval_threads = detail::get_or(ev, "threads", c.eval_threads);
    c.histogram_bins = detail::get_or(ev, "histogram_bins", c.histogram_bins);

    const json oracle = detail::get_or(j, "oracle", json::object());
    detail::check_keys(oracle, "oracle", {"max_size", "force"});
    c.oracle_max_size = detail::get_or(oracle, "max_size", c.oracle_max_size);
    c.oracle_force = detail::get_or(oracle, "force", c.oracle_force);

    if (j.contains("station_file"))
        c.station = station_from_json(load_json_file(resolve(j.at("station_file").get<std::string>())));
    else if (j.contains("station"))
        c.station = station_from_json(j.at("station"));

    c.output_dir = resolve(detail::get_or<std::string>(j, "output_dir", c.output_dir));
    c.emit_timings = detail::get_or(j, "emit_timings", c.emit_timings);
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::string base;
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) base = path.substr(0, slash);
    return parse_run_config(load_json_file(path), base);
}

/// Loads `quarter,electricity_kwh,hydrogen_kg` rows; quarters must be 0..T-1 once each.
inline LoadProfile load_loads_csv(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ParseError("empty loads file " + path);
    const auto header = csv::split(lines[0]);
    if (header.size() != 3 || csv::trim(header[0]) != "quarter" ||
        csv::trim(header[1]) != "electricity_kwh" || csv::trim(header[2]) != "hydrogen_kg")
        throw ParseError("expected header 'quarter,electricity_kwh,hydrogen_kg' in " + path, 1);
    std::vector<std::pair<long, std::pair<double, double>>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != 3) throw ParseError("expected 3 fields", i + 1);
        rows.push_back({csv::parse_long(f[0], i + 1),
                        {csv::parse_double(f[1], i + 1), csv::parse_double(f[2], i + 1)}});
    }
    LoadProfile lp;
    lp.electricity_kwh.assign(rows.size(), 0.0);
    lp.hydrogen_kg.assign(rows.size(), 0.0);
    std::vector<char> seen(rows.size(), 0);
    for (const auto& [q, v] : rows) {
        if (q < 0 || q >= static_cast<long>(rows.size()) || seen[static_cast<std::size_t>(q)])
            throw ParseError("quarter indices must cover 0..T-1 exactly once in " + path);
        seen[static_cast<std::size_t>(q)] = 1;
        lp.electricity_kwh[static_cast<std::size_t>(q)] = v.first;
        lp.hydrogen_kg[static_cast<std::size_t>(q)] = v.second;
    }
    lp.validate();
    return lp;
}

}  // namespace chargebid
