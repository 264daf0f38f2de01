#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loam/plan/operator_kind.hpp"

namespace loam {

// One node of a physical plan tree. Plans are plain value types: copying a
// node copies its whole subtree, and immutability after construction is by
// convention (builders return by value, consumers take const refs).
struct PlanNode {
    OperatorKind kind = OperatorKind::Sink;

    // TableScan attributes.
    std::optional<std::string> table_id;
    std::optional<std::int64_t> n_partitions;
    std::optional<std::int64_t> n_columns;

    // Join attributes.
    std::optional<JoinForm> join_form;
    std::vector<std::string> join_columns;

    // Aggregate attributes.
    std::vector<std::string> agg_columns;
    std::vector<std::string> groupby_columns;
    std::vector<AggFunction> agg_functions;

    // Filter / Calc attributes.
    std::vector<std::string> filter_columns;
    std::vector<FilterFunction> filter_functions;

    std::vector<PlanNode> children;

    // Assigned by decompose_stages; -1 until then.
    int stage_id = -1;

    bool operator==(const PlanNode&) const = default;
};

// The plan tree is identified with its root node.
using QueryPlan = PlanNode;

using ReshuffleSet = std::set<OperatorKind>;

// Operators whose inputs must be co-partitioned: hash/merge joins, grouping
// aggregates, plus Sort and explicit Exchange.
const ReshuffleSet& default_reshuffle_set();

std::size_t node_count(const PlanNode& plan);
std::size_t leaf_count(const PlanNode& plan);

// Visits `plan` in pre-order (node before children, children left to right).
template <typename Fn>
void for_each_node(const PlanNode& plan, Fn&& fn) {
    fn(plan);
    for (const auto& c : plan.children) for_each_node(c, fn);
}

template <typename Fn>
void for_each_node(PlanNode& plan, Fn&& fn) {
    fn(plan);
    for (auto& c : plan.children) for_each_node(c, fn);
}

// Rewrites nodes of arity > 2 into left-deep binary chains of the same kind.
// Leaf order and scan attributes are preserved; already-binary plans come
// back unchanged. Throws StructuralError on malformed trees (depth blowup,
// which is the value-type manifestation of a cyclic input).
QueryPlan canonicalize(const QueryPlan& plan);

// Assigns stage ids: a stage boundary sits on every edge from a
// reshuffle-inducing node to a child, so each child subtree of such a node
// opens a fresh pipeline. Ids are dense, assigned in pre-order, root = 0.
// Idempotent. Requires a canonicalized plan.
QueryPlan decompose_stages(const QueryPlan& plan,
                           const ReshuffleSet& reshuffle = default_reshuffle_set());

// Number of stages implied by the boundary rule: sum of reshuffle-node
// arities, plus one for the root pipeline.
std::size_t expected_stage_count(const QueryPlan& plan,
                                 const ReshuffleSet& reshuffle = default_reshuffle_set());

std::size_t stage_count(const QueryPlan& plan);

// Structural validity for a canonicalized plan: scans carry table metadata
// and have no children, joins have exactly two children. Throws
// StructuralError with the offending detail.
void validate_plan(const QueryPlan& plan);

}  // namespace loam
