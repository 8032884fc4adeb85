#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chargebid/pipeline.hpp"

// Command-line front end. Every subcommand is a thin wrapper over the pipeline
// drivers; configuration comes from an optional JSON file with per-flag overrides
// applied on top. Exit codes: 0 ok, 2 bad input, 3 solver did not converge,
// 4 internal failure.

namespace {

using chargebid::RunConfig;

struct Overrides {
    CLI::App* cmd = nullptr;
    std::string output_dir, da_csv, id_csv, loads_csv, eval_mode, sweep_param;
    int days = 0, k_da = 0, k_id = 0, stages = 0, max_iters = 0, sddp_iters = 0, draws = 0,
        threads = 0;
    long long seed = 0;
    double zscore = 0.0, epsilon = 0.0, benders_eps = 0.0;
    bool force = false, timings = false;
    std::vector<double> multipliers, confidence_levels;
};

void apply_common(const Overrides& o, RunConfig& cfg) {
    const CLI::App* c = o.cmd;
    if (c->count("--output-dir")) cfg.output_dir = o.output_dir;
    if (c->count("--timings")) cfg.emit_timings = o.timings;
}

int dispatch(const std::string& name, const Overrides& o, RunConfig cfg) {
    using namespace chargebid;
    const CLI::App* c = o.cmd;
    apply_common(o, cfg);
    if (name == "ingest") {
        if (c->count("--days")) cfg.synthetic_days = o.days;
        if (c->count("--da-csv")) cfg.da_csv = o.da_csv;
        if (c->count("--id-csv")) cfg.id_csv = o.id_csv;
        if (c->count("--zscore")) cfg.zscore_threshold = o.zscore;
        if (c->count("--epsilon")) cfg.confidence_epsilon = o.epsilon;
        if (c->count("--seed")) cfg.synthetic_seed = static_cast<std::uint64_t>(o.seed);
        cfg.validate();
        const IngestOutcome out = run_ingest(cfg);
        std::printf("ingest: %zu day-ahead days, %zu intraday days -> %s\n", out.da.rows(),
                    out.id.rows(), cfg.output_dir.c_str());
        return 0;
    }
    if (name == "scenarios") {
        if (c->count("--k-da")) cfg.k_da = o.k_da;
        if (c->count("--k-id")) cfg.k_id = o.k_id;
        if (c->count("--seed")) cfg.scenario_seed = static_cast<std::uint64_t>(o.seed);
        cfg.validate();
        const ScenarioOutcome out = run_scenarios(cfg);
        std::printf("scenarios: %zu day-ahead x %zu intraday, %zu leaves\n", out.tree.n_da(),
                    out.id.size(), out.tree.n_leaves());
        return 0;
    }
    if (name == "solve") {
        if (c->count("--stages")) cfg.stages = o.stages;
        if (c->count("--max-iters")) cfg.benders_max_iters = o.max_iters;
        if (c->count("--sddp-iters")) cfg.sddp_max_iters = o.sddp_iters;
        if (c->count("--eps")) cfg.benders_epsilon = o.benders_eps;
        if (c->count("--loads")) cfg.loads_csv = o.loads_csv;
        cfg.validate();
        if (!o.sweep_param.empty()) {
            const ScenarioTree tree = load_scenario_tree(cfg);
            const LoadProfile loads = pipeline_loads(cfg, tree.quarters());
            const auto rows = sensitivity_sweep(cfg, tree, loads, o.sweep_param,
                                                o.multipliers.empty()
                                                    ? std::vector<double>{0.5, 1.0, 1.5, 2.0}
                                                    : o.multipliers);
            std::ostringstream os;
            os << "parameter,multiplier,objective_eur,converged\n";
            for (const auto& r : rows)
                os << r.parameter << "," << csv::format_double(r.multiplier) << ","
                   << csv::format_double(r.objective_eur) << "," << (r.converged ? 1 : 0)
                   << "\n";
            ensure_output_dir(cfg);
            csv::write_file(out_path(cfg, "sensitivity.csv"), os.str());
            std::printf("solve: sensitivity sweep over %s, %zu points\n", o.sweep_param.c_str(),
                        rows.size());
            return 0;
        }
        const SolveOutcome out = run_solve(cfg);
        std::printf("solve: objective %.6f EUR, bounds [%.6f, %.6f], %d iterations%s\n",
                    out.result.objective, out.result.lower_bound, out.result.upper_bound,
                    out.result.iterations, out.result.converged ? "" : " (NOT converged)");
        if (out.result.negative_price_warning)
            std::fprintf(stderr, "warning: negative prices in the scenario tree\n");
        if (!out.result.converged) {
            std::fprintf(stderr, "error: bound gap above tolerance after %d iterations\n",
                         out.result.iterations);
            return 3;
        }
        return 0;
    }
    if (name == "evaluate") {
        if (c->count("--draws")) cfg.eval_draws = o.draws;
        if (c->count("--seed")) cfg.eval_seed = static_cast<std::uint64_t>(o.seed);
        if (c->count("--mode")) cfg.eval_mode = o.eval_mode;
        if (c->count("--threads")) cfg.eval_threads = o.threads;
        cfg.validate();
        if (!o.confidence_levels.empty()) {
            const PriceMatrix da = read_day_matrix(out_path(cfg, "clean_da.csv"));
            const PriceMatrix id = read_day_matrix(out_path(cfg, "clean_id.csv"));
            const auto rows = confidence_study(cfg, da, id, o.confidence_levels);
            std::ostringstream os;
            os << "epsilon,in_sample_eur,mc_mean_eur,mc_variance\n";
            for (const auto& r : rows)
                os << csv::format_double(r.epsilon) << "," << csv::format_double(r.in_sample_eur)
                   << "," << csv::format_double(r.mc_mean_eur) << ","
                   << csv::format_double(r.mc_variance) << "\n";
            csv::write_file(out_path(cfg, "confidence.csv"), os.str());
            std::printf("evaluate: confidence study over %zu levels\n", rows.size());
            return 0;
        }
        const McReport rep = run_evaluate(cfg);
        std::printf("evaluate: mean %.6f EUR over %zu draws, variance %.6f\n", rep.mean,
                    rep.profits.size(), rep.variance);
        return 0;
    }
    if (name == "oracle") {
        if (c->count("--force")) cfg.oracle_force = true;
        if (c->count("--max-size")) cfg.oracle_max_size = o.max_iters;
        cfg.validate();
        const json rep = run_oracle(cfg);
        std::printf("oracle: objective %.6f EUR, exclusivity %s\n",
                    rep.value("objective_eur", 0.0),
                    rep["exclusivity"].value("ok", false) ? "ok" : "VIOLATED");
        return 0;
    }
    if (name == "report") {
        cfg.validate();
        std::fputs(run_report(cfg).c_str(), stdout);
        return 0;
    }
    throw chargebid::InternalError("unhandled subcommand " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bidding curve planner for a hybrid charging station"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration");

    Overrides o;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--output-dir", o.output_dir, "artifact directory");
        c->add_flag("--timings", o.timings, "include wall-clock timings in report.json");
        return c;
    };
    CLI::App* ingest = add_common(app.add_subcommand("ingest", "clean raw prices"));
    ingest->add_option("--days", o.days, "synthetic horizon in days");
    ingest->add_option("--da-csv", o.da_csv, "raw hourly price file");
    ingest->add_option("--id-csv", o.id_csv, "raw quarter-hourly price file");
    ingest->add_option("--zscore", o.zscore, "outlier threshold in standard deviations");
    ingest->add_option("--epsilon", o.epsilon, "confidence trimming level");
    ingest->add_option("--seed", o.seed, "synthetic price seed");

    CLI::App* scen = add_common(app.add_subcommand("scenarios", "reduce days to scenarios"));
    scen->add_option("--k-da", o.k_da, "day-ahead cluster count");
    scen->add_option("--k-id", o.k_id, "intraday cluster count");
    scen->add_option("--seed", o.seed, "clustering seed");

    CLI::App* solve = add_common(app.add_subcommand("solve", "plan bidding curves"));
    solve->add_option("--stages", o.stages, "stage blocks per intraday subproblem");
    solve->add_option("--max-iters", o.max_iters, "coordination iteration cap");
    solve->add_option("--sddp-iters", o.sddp_iters, "per-group iteration cap");
    solve->add_option("--eps", o.benders_eps, "relative bound-gap tolerance");
    solve->add_option("--loads", o.loads_csv, "load profile csv");
    solve->add_option("--sweep", o.sweep_param,
                      "re-solve with this station parameter scaled (writes sensitivity.csv)");
    solve->add_option("--multipliers", o.multipliers, "sweep multipliers");

    CLI::App* eval = add_common(app.add_subcommand("evaluate", "Monte Carlo policy evaluation"));
    eval->add_option("--draws", o.draws, "number of price draws");
    eval->add_option("--seed", o.seed, "evaluation seed");
    eval->add_option("--mode", o.eval_mode, "reoptimize or replay")
        ->check(CLI::IsMember({"reoptimize", "replay"}));
    eval->add_option("--threads", o.threads, "worker threads");
    eval->add_option("--confidence-levels", o.confidence_levels,
                     "trimming levels for the robustness study (writes confidence.csv)");

    CLI::App* oracle = add_common(app.add_subcommand("oracle", "reference extensive solve"));
    oracle->add_flag("--force", o.force, "ignore the size budget");
    oracle->add_option("--max-size", o.max_iters, "size budget");

    add_common(app.add_subcommand("report", "summarize artifacts"));

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : chargebid::load_run_config(config_path);
        for (CLI::App* sub : app.get_subcommands()) {
            o.cmd = sub;
            return dispatch(sub->get_name(), o, cfg);
        }
        return 0;
    } catch (const chargebid::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const chargebid::InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
