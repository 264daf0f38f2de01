#include "loam/plan/plan_node.hpp"

#include <string>

#include "loam/util/errors.hpp"

namespace loam {

namespace {
constexpr int kMaxDepth = 4096;
}

OperatorKind operator_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kNumOperatorKinds; ++i) {
        if (kOperatorKindNames[i] == name) return static_cast<OperatorKind>(i);
    }
    throw DataError("unknown operator kind: " + std::string(name));
}

const ReshuffleSet& default_reshuffle_set() {
    static const ReshuffleSet kSet = {
        OperatorKind::HashJoin,      OperatorKind::MergeJoin, OperatorKind::HashAggregate,
        OperatorKind::SortAggregate, OperatorKind::Exchange,  OperatorKind::Sort,
    };
    return kSet;
}

std::size_t node_count(const PlanNode& plan) {
    std::size_t n = 0;
    for_each_node(plan, [&](const PlanNode&) { ++n; });
    return n;
}

std::size_t leaf_count(const PlanNode& plan) {
    std::size_t n = 0;
    for_each_node(plan, [&](const PlanNode& node) {
        if (node.children.empty()) ++n;
    });
    return n;
}

namespace {

PlanNode canonicalize_rec(const PlanNode& node, int depth) {
    if (depth > kMaxDepth) {
        throw StructuralError("canonicalize: plan deeper than " + std::to_string(kMaxDepth) +
                              " nodes, tree is malformed");
    }
    PlanNode out = node;
    out.children.clear();
    out.children.reserve(node.children.size());
    for (const auto& c : node.children) out.children.push_back(canonicalize_rec(c, depth + 1));

    if (out.children.size() <= 2) return out;

    // Fold c0..cn into a left-deep chain: op(op(op(c0,c1),c2),...). The chain
    // links inherit the node's attributes so join columns etc. survive.
    std::vector<PlanNode> kids = std::move(out.children);
    out.children.clear();
    PlanNode acc = out;
    acc.children.push_back(std::move(kids[0]));
    acc.children.push_back(std::move(kids[1]));
    for (std::size_t i = 2; i + 1 < kids.size(); ++i) {
        PlanNode link = out;
        link.children.push_back(std::move(acc));
        link.children.push_back(std::move(kids[i]));
        acc = std::move(link);
    }
    out.children.push_back(std::move(acc));
    out.children.push_back(std::move(kids.back()));
    return out;
}

void assign_stages(PlanNode& node, int my_stage, int& next_stage, const ReshuffleSet& reshuffle) {
    node.stage_id = my_stage;
    const bool cuts_below = reshuffle.count(node.kind) > 0;
    for (auto& c : node.children) {
        if (cuts_below) {
            assign_stages(c, next_stage++, next_stage, reshuffle);
        } else {
            assign_stages(c, my_stage, next_stage, reshuffle);
        }
    }
}

}  // namespace

QueryPlan canonicalize(const QueryPlan& plan) { return canonicalize_rec(plan, 0); }

QueryPlan decompose_stages(const QueryPlan& plan, const ReshuffleSet& reshuffle) {
    QueryPlan out = plan;
    int next_stage = 1;
    assign_stages(out, 0, next_stage, reshuffle);
    return out;
}

std::size_t expected_stage_count(const QueryPlan& plan, const ReshuffleSet& reshuffle) {
    std::size_t cuts = 0;
    for_each_node(plan, [&](const PlanNode& node) {
        if (reshuffle.count(node.kind) > 0) cuts += node.children.size();
    });
    return cuts + 1;
}

std::size_t stage_count(const QueryPlan& plan) {
    std::set<int> ids;
    for_each_node(plan, [&](const PlanNode& node) { ids.insert(node.stage_id); });
    if (ids.count(-1)) throw PreconditionError("stage_count: plan has unassigned stage ids");
    return ids.size();
}

void validate_plan(const QueryPlan& plan) {
    for_each_node(plan, [](const PlanNode& node) {
        if (node.kind == OperatorKind::TableScan) {
            if (!node.table_id || !node.n_partitions || !node.n_columns) {
                throw StructuralError("TableScan node missing table_id/n_partitions/n_columns");
            }
            if (*node.n_partitions <= 0 || *node.n_columns <= 0) {
                throw StructuralError("TableScan counts must be positive");
            }
            if (!node.children.empty()) throw StructuralError("TableScan node must be a leaf");
        }
        if (is_join(node.kind) && node.children.size() != 2) {
            throw StructuralError("join node must have exactly two children after canonicalization");
        }
        if (node.children.size() > 2) {
            throw StructuralError("node arity > 2; canonicalize first");
        }
    });
}

}  // namespace loam
