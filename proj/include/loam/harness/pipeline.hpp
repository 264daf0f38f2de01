#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loam/harness/config.hpp"
#include "loam/model/checkpoint.hpp"
#include "loam/rank/ranker.hpp"

namespace loam {

struct PerQueryResult {
    std::string query_id;
    std::size_t n_candidates = 0;
    std::size_t chosen_index = 0;
    double cost_loam = 0.0;     // mean replayed cost of the selected plan
    double cost_default = 0.0;  // mean replayed cost of the default plan
    double cost_best = 0.0;     // best candidate by mean replayed cost
    double rel_dev_loam = 0.0;
    double rel_dev_best = 0.0;     // best-achievable model M_b
    double rel_dev_default = 0.0;  // improvement space of the native optimizer
    double predicted_cost_chosen = 0.0;
    double explore_seconds = 0.0;
    double inference_seconds = 0.0;
};

struct PipelineSummary {
    std::size_t n_train_records = 0;
    std::size_t n_domain_candidates = 0;
    std::size_t n_test_queries = 0;
    std::size_t speedups = 0;
    std::size_t slowdowns = 0;
    std::size_t ties = 0;
    double mean_cost_loam = 0.0;
    double mean_cost_default = 0.0;
    double mean_cost_best = 0.0;
    double mean_rel_dev_loam = 0.0;
    double mean_rel_dev_best = 0.0;
    double mean_rel_dev_default = 0.0;
};

struct PipelineResult {
    std::string artifact_dir;
    PipelineSummary summary;
    std::vector<PerQueryResult> per_query;
};

// End-to-end experiment over one project: generate -> split by day -> build
// corpus (defaults + unexecuted candidates) -> train -> build e_r -> per
// test query: explore, select, flighting-replay every candidate. Each stage
// persists its artifacts, so a failed run resumes from the last completed
// stage (resume = true skips stages whose outputs exist for this config).
class Pipeline {
public:
    explicit Pipeline(ExperimentConfig config, bool resume = false);

    PipelineResult run();

    // Individual stages, exposed for the CLI.
    void generate();
    void train_model();
    PipelineResult evaluate();

    const std::string& artifact_dir() const { return dir_; }
    const ExperimentConfig& config() const { return config_; }

private:
    void ensure_world();
    void ensure_generated();
    void ensure_trained();
    bool artifacts_present(const std::vector<std::string>& names) const;
    std::string path(const std::string& name) const;

    ExperimentConfig config_;
    bool resume_;
    std::string dir_;

    std::unique_ptr<SyntheticWarehouse> warehouse_;
    std::vector<Query> workload_;
    HistoricalRepository repository_;
    std::optional<FeatureLayout> layout_;
    std::optional<TrainedModel> model_;
    std::optional<RepresentativeEnvironment> rep_env_;
};

PipelineResult run_pipeline(const ExperimentConfig& config, bool resume = false);

// Two-stage project selection at desk scale: generates train/eval project
// cohorts, computes filter stats and improvement-space labels by flighting
// replay, trains the ranker on the train cohort and ranks the eval cohort,
// emitting the ranking CSV, the top-N list, and Recall/NDCG curves against
// the closed-form random baseline.
struct SelectProjectsResult {
    std::string ranking_csv;
    std::string metrics_csv;
    std::string top_n_file;
    std::vector<ProjectRankEntry> ranking;
    std::vector<double> truth_by_project;  // mean true D(M_d), eval cohort order = id order
};

SelectProjectsResult run_select_projects(const ExperimentConfig& config);

}  // namespace loam
