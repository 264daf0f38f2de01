#include "loam/rank/signature.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace loam {

int PlanSignature::pattern_total() const {
    int total = 0;
    for (const auto& [pattern, count] : pattern_counts) total += count;
    return total;
}

PlanSignature make_signature(const QueryPlan& plan,
                             const std::function<std::int64_t(const std::string&)>& table_rows,
                             double default_cost) {
    PlanSignature sig;
    sig.default_cost = default_cost;
    std::set<std::string> tables;
    for_each_node(plan, [&](const PlanNode& node) {
        ++sig.total_operators;
        for (const auto& child : node.children) {
            ++sig.pattern_counts[{node.kind, child.kind}];
        }
        if (node.table_id) tables.insert(*node.table_id);
    });

    std::vector<double> sizes;
    for (const auto& t : tables) sizes.push_back(static_cast<double>(table_rows(t)));
    std::sort(sizes.rbegin(), sizes.rend());
    for (std::size_t i = 0; i < 3 && i < sizes.size(); ++i) sig.top3_table_sizes[i] = sizes[i];
    return sig;
}

int signature_feature_dim() {
    return 1 + static_cast<int>(kNumOperatorKinds * kNumOperatorKinds) + 3 + 1;
}

Eigen::VectorXd signature_features(const PlanSignature& sig) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(signature_feature_dim());
    v[0] = sig.total_operators;
    for (const auto& [pattern, count] : sig.pattern_counts) {
        const int idx = 1 + static_cast<int>(pattern.first) * static_cast<int>(kNumOperatorKinds) +
                        static_cast<int>(pattern.second);
        v[idx] = count;
    }
    const int base = 1 + static_cast<int>(kNumOperatorKinds * kNumOperatorKinds);
    for (int i = 0; i < 3; ++i) v[base + i] = sig.top3_table_sizes[static_cast<std::size_t>(i)];
    v[base + 3] = sig.default_cost;
    return v;
}

}  // namespace loam
