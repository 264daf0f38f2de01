#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "loam/plan/plan_node.hpp"

namespace loam {

// Project-agnostic fingerprint of a default plan: operator count,
// parent/child operator-pattern counts, the three largest involved table
// sizes, and the observed default cost. Carries no identifier strings, so a
// ranker trained on these transfers across projects.
struct PlanSignature {
    int total_operators = 0;
    std::map<std::pair<OperatorKind, OperatorKind>, int> pattern_counts;
    std::array<double, 3> top3_table_sizes = {0.0, 0.0, 0.0};  // descending, zero-padded
    double default_cost = 0.0;

    // Edge-count identity for a tree: sum of pattern counts = nodes - 1.
    int pattern_total() const;
};

PlanSignature make_signature(const QueryPlan& plan,
                             const std::function<std::int64_t(const std::string&)>& table_rows,
                             double default_cost);

// Dense feature vector: [total_operators | 13x13 pattern grid | top3 sizes |
// cost], un-normalized (the ranker fits min-max bounds at training time).
Eigen::VectorXd signature_features(const PlanSignature& sig);
int signature_feature_dim();

}  // namespace loam
