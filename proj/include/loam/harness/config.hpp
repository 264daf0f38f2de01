#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loam/explore/explorer.hpp"
#include "loam/model/train.hpp"
#include "loam/rank/gbdt.hpp"
#include "loam/rank/workload_stats.hpp"
#include "loam/select/plan_selection.hpp"
#include "loam/sim/warehouse.hpp"

namespace loam {

struct SplitConfig {
    int train_days = 25;
    int test_days = 5;
};

struct ExplorerConfig {
    KnobSet knobs;
    std::size_t k_max = 5;
    double max_explore_seconds = 0.1;  // per-query bound, asserted
};

struct TrainingSectionConfig {
    double lr0 = 0.01;
    double lr_decay = 0.99;
    int epochs = 200;
    int batch_size = 32;
    std::size_t max_training_queries = 10000;
    std::size_t max_domain_candidates = 512;  // unexecuted plans for the domain term
};

struct ReplayConfig {
    std::size_t runs_per_candidate = 40;
};

struct ProjectSelectionConfig {
    int n_train_projects = 13;
    int n_eval_projects = 15;
    std::size_t queries_per_project = 12;
    std::size_t replays_per_candidate = 30;
    std::size_t top_n = 5;
    double rel_clip = 30.0;
    // Planner-misestimation band sampled per generated project; the spread
    // of improvement space across the cohort comes from this and from the
    // per-project join-topology differences.
    double misestimation_lo = 0.05;
    double misestimation_hi = 0.95;
    FilterThresholds thresholds;
    GbdtConfig gbdt;
};

// Whole-experiment configuration; serializes to JSON so a stored config
// re-runs to identical outputs.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "loam_out";

    ProjectSpec project;
    CostOracleSpec oracle = CostOracleSpec::defaults();
    EnvironmentModelParams environment;
    ExplorerConfig explorer;
    PredictorConfig predictor;
    TrainingSectionConfig training;
    AblationMode ablation = AblationMode::Full;
    EnvSource selection_source = EnvSource::HistoricalMean;
    ReplayConfig replay;
    SplitConfig split;
    int hash_segments = 5;
    int hash_segment_width = 10;
    std::vector<std::size_t> training_size_sweep;  // optional extra runs
    ProjectSelectionConfig project_selection;

    std::string to_json_string() const;
    static ExperimentConfig from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static ExperimentConfig load(const std::string& path);

    // Root seed fan-out (project, training, environment, replay, ...).
    std::uint64_t seed_for(const std::string& stream, std::uint64_t index = 0) const {
        return derive_seed(seed, stream, index);
    }

    // output_dir, prefixed by $LOAM_OUTPUT_ROOT when set.
    std::string resolved_output_dir() const;

    std::uint64_t content_hash() const;
};

}  // namespace loam
