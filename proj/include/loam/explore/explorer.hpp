#pragma once

#include <vector>

#include "loam/sim/warehouse.hpp"

namespace loam {

// Which optimizer knobs the explorer may toggle, plus the cardinality scales
// it may apply. All flags off with scales {1} reproduces exactly the default
// plan.
struct KnobSet {
    bool merge_join_substitution = true;
    bool join_commutation = true;
    bool join_reorder_toggle = true;
    bool filter_placement = true;
    bool exchange_elision = true;
    bool spool_toggle = true;
    std::vector<double> cardinality_scales = {0.1, 1.0, 10.0};
};

struct CandidateSet {
    std::vector<QueryPlan> plans;      // [0] is always the default plan
    std::vector<double> rough_costs;   // planner's heuristic estimate, aligned
    double generation_seconds = 0.0;
};

// Enumerates every combination of the enabled knobs x cardinality scales,
// deduplicates structurally identical plans, and truncates to k_max by the
// planner's rough cost estimate (default plan always kept, at index 0).
// Never executes a plan. Deterministic.
CandidateSet generate_candidates(const SyntheticWarehouse& warehouse, const Query& query,
                                 const KnobSet& knobs, std::size_t k_max);

}  // namespace loam
