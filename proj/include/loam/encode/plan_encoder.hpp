#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "loam/encode/hash_encoder.hpp"
#include "loam/plan/repository.hpp"

namespace loam {

// Contiguous block inside a feature row.
struct FeatureSpan {
    int offset = 0;
    int size = 0;
};

// Frozen encoding layout: hash seeds plus the normalization bounds fitted
// once on the training repository. Training and inference must share one
// layout; it persists to a sidecar file next to the repository and a version
// mismatch on load is a hard error.
struct FeatureLayout {
    int layout_version = 1;

    int hash_segments = 5;
    int hash_segment_width = 10;
    std::uint64_t hash_master_seed = 0;

    // log-min-max bounds fitted at layout time.
    double log_partitions_lo = 0.0, log_partitions_hi = 0.0;
    double log_columns_lo = 0.0, log_columns_hi = 0.0;
    double log_load5_lo = 0.0, log_load5_hi = 0.0;

    FeatureSpan operator_onehot;
    FeatureSpan scan;         // table hash | norm(n_partitions) | norm(n_columns)
    FeatureSpan join;         // join-form one-hot | join-column hash
    FeatureSpan aggregate;    // function one-hot | agg-column hash | group-by hash
    FeatureSpan filter;       // function multi-hot | filter-column hash
    FeatureSpan environment;  // cpu_idle | io_wait | norm(load5) | mem_usage

    int feature_dim = 0;

    // Stable content hash binding checkpoints to the layout they trained on.
    std::uint64_t content_hash() const;

    std::string to_json_string() const;
    static FeatureLayout from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static FeatureLayout load(const std::string& path);
};

// Computes span offsets and fits the normalization bounds on a training
// repository (scan numerics from plans, LOAD5 from stage environments).
FeatureLayout fit_layout(const HistoricalRepository& repo, int hash_segments = 5,
                         int hash_segment_width = 10, std::uint64_t hash_master_seed = 0);

// Vectorized plan: one feature row per node (pre-order), child indices, and
// the stage id of each node.
struct PlanFeatureTensor {
    Eigen::MatrixXd node_features;                           // n_nodes x feature_dim, in [0,1]
    Eigen::Matrix<int, Eigen::Dynamic, 2> topology;          // left/right child row or -1
    std::vector<int> stage_of_node;
    std::uint64_t layout_hash = 0;

    Eigen::Index n_nodes() const { return node_features.rows(); }
};

// The environment block values used when a plan has no observed environment
// (unexecuted candidates): the average-case representative point.
inline constexpr double kEnvSentinel[4] = {0.5, 0.05, 0.5, 0.5};

class PlanEncoder {
public:
    explicit PlanEncoder(FeatureLayout layout);

    const FeatureLayout& layout() const { return layout_; }

    // One feature row. `env` carries raw metrics (load5 unnormalized);
    // absent env encodes the sentinel block.
    Eigen::VectorXd encode_node(const PlanNode& node,
                                const std::optional<EnvironmentVector>& env) const;

    // Whole plan; record_envs must cover every stage when supplied.
    PlanFeatureTensor encode_plan(const QueryPlan& plan,
                                  const std::map<int, EnvironmentVector>* record_envs) const;

    // Inference path: every stage shares one already-normalized environment
    // block (the representative environment e_r).
    PlanFeatureTensor encode_plan_fixed_env(const QueryPlan& plan,
                                            const Eigen::Vector4d& normalized_env) const;

    double normalize_load5(double load5) const;

    // Count of numeric attributes clamped because they fell outside the
    // fitted normalization range.
    std::uint64_t clamp_count() const { return clamp_count_.load(); }

private:
    double norm_log(double value, double lo, double hi) const;
    void fill_row(const PlanNode& node, const double* env_block,
                  Eigen::Ref<Eigen::VectorXd> row) const;

    FeatureLayout layout_;
    HashEncoder hasher_;
    mutable std::atomic<std::uint64_t> clamp_count_{0};
};

}  // namespace loam
