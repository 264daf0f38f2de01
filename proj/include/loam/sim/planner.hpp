#pragma once

#include "loam/sim/cost_oracle.hpp"
#include "loam/sim/schema.hpp"

namespace loam {

// The six explorer-visible optimizer flags plus the cardinality scale. The
// all-off, scale-1 configuration is the native planner and yields the
// default plan. Each flag inverts one of the native planner's rule
// decisions for the whole plan.
struct PlannerKnobs {
    bool prefer_merge_join = false;         // invert the hash/merge join rule
    bool swap_join_inputs = false;          // commute build/probe sides
    bool hold_template_join_order = false;  // disable greedy join reordering
    bool hold_filters_above_joins = false;  // keep residual filter above joins
    bool elide_exchange_before_agg = false; // invert the Exchange-under-aggregate rule
    bool spool_shared_subtrees = false;     // invert the shared-subtree spool rule

    // Applied to estimated cardinalities of sub-plans with >= 3 base inputs
    // during join-order search.
    double cardinality_scale = 1.0;

    bool operator==(const PlannerKnobs&) const = default;
};

// Native rule thresholds, evaluated on the planner's (misestimated) row
// counts. Wrong estimates flow into wrong rule decisions, which is where the
// knobs find their improvement space.
struct PlannerRules {
    double merge_join_row_threshold = 5000.0;  // merge join below, hash join above
    double exchange_row_threshold = 2000.0;    // Exchange only above this agg input
    bool spool_duplicates = true;              // materialize repeated scan branches

    bool operator==(const PlannerRules&) const = default;
};

// Statistics-free rule-based planner: partition pruning from metadata,
// greedy join order and build-side selection on the planner's (misestimated)
// fanouts, per-join algorithm and exchange rules. Deterministic.
class RuleBasedPlanner {
public:
    explicit RuleBasedPlanner(const CostOracle& oracle, PlannerRules rules = {})
        : oracle_(oracle), rules_(rules) {}

    QueryPlan build_plan(const QueryTemplate& tmpl, int param_index,
                         const PlannerKnobs& knobs) const;

    QueryPlan default_plan(const QueryTemplate& tmpl, int param_index) const {
        return build_plan(tmpl, param_index, PlannerKnobs{});
    }

    const PlannerRules& rules() const { return rules_; }

private:
    const CostOracle& oracle_;
    PlannerRules rules_;
};

}  // namespace loam
