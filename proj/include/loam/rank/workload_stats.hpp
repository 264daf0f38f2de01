#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "loam/plan/repository.hpp"

namespace loam {

struct WorkloadStats {
    double n_query = 0.0;            // average queries per day
    double query_inc_ratio = 0.0;    // mean day-over-day growth
    double stable_table_ratio = 0.0; // fraction of queries touching only long-lived tables
    int days = 0;
    bool had_zero_query_day = false; // flagged: such days contribute ratio 0
};

// n_query = |Q| / d; query_inc_ratio = mean over days 2..d of |Q_i|/|Q_{i-1}|
// (a zero-query previous day contributes 0 and flags the project);
// stable_table_ratio = fraction of queries all of whose tables outlive
// `lifespan_floor_days`. Day indices are 0-based and span [0, d).
// query_inc_ratio needs d >= 2.
WorkloadStats compute_stats(
    std::span<const Query> workload, int days,
    const std::function<std::vector<std::string>(const Query&)>& tables_of,
    const std::function<std::int64_t(const std::string&)>& lifespan_of_table,
    int lifespan_floor_days = 30);

struct FilterThresholds {
    double min_queries_per_day = 2000.0;  // N0 (R1)
    double min_growth_ratio = 0.0;        // r (R2); 0 = solve from N0
    double min_stable_ratio = 0.2;        // theta (R3)
    int lifespan_floor_days = 30;         // n
    double target_training_queries = 10000.0;
    int growth_horizon_days = 30;

    // Smallest r with N0 * r^horizon >= target.
    double solved_growth_ratio() const;
    double effective_growth_ratio() const {
        return min_growth_ratio > 0.0 ? min_growth_ratio : solved_growth_ratio();
    }
};

struct FilterDecision {
    bool pass = false;
    bool r1_pass = false;  // n_query >= N0
    bool r2_pass = false;  // query_inc_ratio >= r
    bool r3_pass = false;  // stable_table_ratio >= theta
    double growth_threshold_used = 0.0;
};

FilterDecision apply_filter(const WorkloadStats& stats, const FilterThresholds& thresholds = {});

}  // namespace loam
