#include "loam/explore/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "loam/plan/serialize.hpp"
#include "loam/util/errors.hpp"

namespace loam {

CandidateSet generate_candidates(const SyntheticWarehouse& warehouse, const Query& query,
                                 const KnobSet& knobs, std::size_t k_max) {
    if (k_max == 0) throw ArgumentError("generate_candidates: k_max must be positive");
    const auto t0 = std::chrono::steady_clock::now();

    std::size_t n_enabled = 0;
    auto knobs_for_mask = [&](std::size_t mask, double scale) {
        PlannerKnobs pk;
        pk.cardinality_scale = scale;
        std::size_t b = 0;
        auto bind = [&](bool enabled_flag, bool& slot) {
            if (enabled_flag) slot = (mask >> b++) & 1;
        };
        bind(knobs.merge_join_substitution, pk.prefer_merge_join);
        bind(knobs.join_commutation, pk.swap_join_inputs);
        bind(knobs.join_reorder_toggle, pk.hold_template_join_order);
        bind(knobs.filter_placement, pk.hold_filters_above_joins);
        bind(knobs.exchange_elision, pk.elide_exchange_before_agg);
        bind(knobs.spool_toggle, pk.spool_shared_subtrees);
        n_enabled = b;
        return pk;
    };
    knobs_for_mask(0, 1.0);  // sets n_enabled

    std::vector<double> scales = knobs.cardinality_scales;
    if (scales.empty()) scales.push_back(1.0);

    const QueryPlan default_plan = warehouse.default_plan(query);
    const std::string default_key = plan_key(default_plan);

    struct Candidate {
        QueryPlan plan;
        double rough_cost;
        std::string key;
    };
    std::vector<Candidate> alternatives;
    std::set<std::string> seen = {default_key};

    for (double scale : scales) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << n_enabled); ++mask) {
            QueryPlan plan = warehouse.plan_with_knobs(query, knobs_for_mask(mask, scale));
            std::string key = plan_key(plan);
            if (!seen.insert(key).second) continue;
            const double rough = warehouse.oracle().rough_cost_estimate(plan);
            alternatives.push_back({std::move(plan), rough, std::move(key)});
        }
    }

    std::sort(alternatives.begin(), alternatives.end(), [](const Candidate& a, const Candidate& b) {
        if (a.rough_cost != b.rough_cost) return a.rough_cost < b.rough_cost;
        return a.key < b.key;
    });

    CandidateSet out;
    out.plans.push_back(default_plan);
    out.rough_costs.push_back(warehouse.oracle().rough_cost_estimate(default_plan));
    for (const auto& c : alternatives) {
        if (out.plans.size() >= k_max) break;
        out.plans.push_back(c.plan);
        out.rough_costs.push_back(c.rough_cost);
    }

    out.generation_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace loam
