#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "loam/deviance/deviance.hpp"
#include "loam/harness/pipeline.hpp"
#include "loam/harness/report.hpp"
#include "loam/plan/serialize.hpp"
#include "loam/util/csv.hpp"

using namespace loam;

namespace {

ExperimentConfig load_config(const std::string& config_path, std::uint64_t seed_override,
                             bool seed_given, const std::string& out_override) {
    ExperimentConfig config =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (seed_given) config.seed = seed_override;
    if (!out_override.empty()) config.output_dir = out_override;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loam: learned query optimizer laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--seed", seed, "override the root seed")
            ->each([&](const std::string&) { seed_given = true; });
        cmd->add_option("--out", out_dir, "override the output directory");
    };

    auto* cmd_generate = app.add_subcommand("generate", "synthesize the project and its history");
    add_common(cmd_generate);
    bool export_trace = false;
    cmd_generate->add_flag("--export-trace", export_trace,
                           "also export an environment trace CSV");

    auto* cmd_train = app.add_subcommand("train", "fit the adaptive cost predictor");
    add_common(cmd_train);

    auto* cmd_optimize =
        app.add_subcommand("optimize", "run the full pipeline: generate, train, select, replay");
    add_common(cmd_optimize);
    bool resume = false;
    bool refresh_env = false;
    cmd_optimize->add_flag("--resume", resume, "reuse completed stage artifacts");
    cmd_optimize->add_flag("--refresh-env", refresh_env,
                           "rebuild the representative environment before selecting");

    auto* cmd_replay = app.add_subcommand("replay", "flighting-replay one query's candidates");
    add_common(cmd_replay);
    std::string replay_query;
    std::size_t replay_runs = 50;
    cmd_replay->add_option("--query-id", replay_query, "query to replay")->required();
    cmd_replay->add_option("--runs", replay_runs, "replays per candidate");

    auto* cmd_select = app.add_subcommand("select-projects",
                                          "rank projects by estimated improvement space");
    add_common(cmd_select);
    std::size_t top_n = 0;
    cmd_select->add_option("--top-n", top_n, "size of the deployment list");

    auto* cmd_report = app.add_subcommand("report", "render summary and plot data");
    add_common(cmd_report);
    std::string report_dir;
    cmd_report->add_option("--dir", report_dir, "artifact directory (defaults to config output)");

    auto* cmd_theorem = app.add_subcommand("theorem-check",
                                           "Monte-Carlo check of the selection-policy ordering");
    add_common(cmd_theorem);
    std::size_t t_instances = 100;
    std::size_t t_draws = 100000;
    cmd_theorem->add_option("--instances", t_instances, "number of random instances");
    cmd_theorem->add_option("--draws", t_draws, "Monte-Carlo draws per instance");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig config = load_config(config_path, seed, seed_given, out_dir);

        if (*cmd_generate) {
            Pipeline p(config);
            p.generate();
            if (export_trace) {
                ProjectSpec spec = config.project;
                spec.rng_seed = config.seed_for("trace_export");
                SyntheticWarehouse warehouse(spec, config.oracle, config.environment);
                const auto trace = warehouse.cluster_window(kClusterWindowTicks);
                const std::string path = config.resolved_output_dir() + "/environment_trace.csv";
                std::ofstream out(path);
                out << "tick,cpu_idle,io_wait,load5,mem_usage\n";
                for (std::size_t i = 0; i < trace.size(); ++i) {
                    out << i << ',' << fmt_double(trace[i].cpu_idle) << ','
                        << fmt_double(trace[i].io_wait) << ',' << fmt_double(trace[i].load5) << ','
                        << fmt_double(trace[i].mem_usage) << '\n';
                }
                std::cout << "environment trace: " << path << "\n";
            }
            std::cout << "generated project artifacts in " << p.artifact_dir() << "\n";
        } else if (*cmd_train) {
            Pipeline p(config, true);
            p.train_model();
            std::cout << "model checkpoint written in " << p.artifact_dir() << "\n";
        } else if (*cmd_optimize) {
            Pipeline p(config, resume && !refresh_env);
            const PipelineResult r = p.run();
            std::printf("test queries: %zu\n", r.summary.n_test_queries);
            std::printf("mean cost   : loam %.6g | default %.6g | best %.6g\n",
                        r.summary.mean_cost_loam, r.summary.mean_cost_default,
                        r.summary.mean_cost_best);
            std::printf("speedups %zu / slowdowns %zu / ties %zu\n", r.summary.speedups,
                        r.summary.slowdowns, r.summary.ties);
            std::printf("relative deviance: loam %.4f | best-achievable %.4f | default %.4f\n",
                        r.summary.mean_rel_dev_loam, r.summary.mean_rel_dev_best,
                        r.summary.mean_rel_dev_default);
            std::cout << "artifacts: " << r.artifact_dir << "\n";
        } else if (*cmd_replay) {
            ProjectSpec spec = config.project;
            spec.rng_seed = config.seed_for("project");
            SyntheticWarehouse warehouse(spec, config.oracle, config.environment);
            const auto workload = warehouse.generate_workload();
            const Query* query = nullptr;
            for (const auto& q : workload) {
                if (q.query_id == replay_query) query = &q;
            }
            if (!query) {
                std::cerr << "unknown query id: " << replay_query << "\n";
                return 2;
            }
            const CandidateSet cands = generate_candidates(warehouse, *query,
                                                           config.explorer.knobs,
                                                           config.explorer.k_max);
            Rng rng(config.seed_for("replay_cli"));
            std::cout << "candidate,run,cpu_cost\n";
            for (std::size_t i = 0; i < cands.plans.size(); ++i) {
                const auto recs = warehouse.flighting_replay(cands.plans[i], replay_runs, rng);
                for (std::size_t r = 0; r < recs.size(); ++r) {
                    std::cout << i << ',' << r << ',' << fmt_double(recs[r].cpu_cost) << "\n";
                }
            }
        } else if (*cmd_select) {
            ExperimentConfig cfg = config;
            if (top_n > 0) cfg.project_selection.top_n = top_n;
            const SelectProjectsResult r = run_select_projects(cfg);
            std::cout << "ranking:   " << r.ranking_csv << "\n";
            std::cout << "metrics:   " << r.metrics_csv << "\n";
            std::cout << "deploy to: " << r.top_n_file << "\n";
        } else if (*cmd_report) {
            const std::string dir = report_dir.empty() ? config.resolved_output_dir() : report_dir;
            const ReportResult r = write_report(dir);
            std::cout << std::ifstream(r.report_path).rdbuf();
            std::cout << "report: " << r.report_path << "\n";
        } else if (*cmd_theorem) {
            Rng rng(config.seed_for("theorem_instances"));
            std::vector<std::vector<LogNormalDist>> instances;
            for (std::size_t i = 0; i < t_instances; ++i) {
                const std::size_t n = 2 + rng.uniform_index(4);  // 2..5 candidates
                std::vector<LogNormalDist> dists;
                for (std::size_t c = 0; c < n; ++c) {
                    dists.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.1, 0.8), 0});
                }
                instances.push_back(std::move(dists));
            }
            const std::vector<SelectionPolicy> policies = {random_policy(),
                                                           worst_expected_policy()};
            const Theorem1Report rep =
                theorem1_battery(instances, policies, t_draws, config.seed_for("theorem_mc"));
            std::size_t violations = 0;
            for (const auto& inst : rep.instances) {
                for (bool ok : inst.ordering_ok) {
                    if (!ok) ++violations;
                }
                if (!inst.oracle_identically_zero) ++violations;
            }
            std::printf("instances: %zu, draws: %zu, ordering violations: %zu\n", t_instances,
                        t_draws, violations);
            return rep.all_ok ? 0 : 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
