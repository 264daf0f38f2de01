#include "loam/rank/workload_stats.hpp"

#include <cmath>

#include "loam/util/errors.hpp"

namespace loam {

WorkloadStats compute_stats(
    std::span<const Query> workload, int days,
    const std::function<std::vector<std::string>(const Query&)>& tables_of,
    const std::function<std::int64_t(const std::string&)>& lifespan_of_table,
    int lifespan_floor_days) {
    if (days < 2) throw ArgumentError("compute_stats: query_inc_ratio needs at least 2 days");

    WorkloadStats stats;
    stats.days = days;
    stats.n_query = static_cast<double>(workload.size()) / static_cast<double>(days);

    std::vector<std::size_t> per_day(static_cast<std::size_t>(days), 0);
    std::size_t stable = 0;
    for (const auto& q : workload) {
        if (q.submit_day < 0 || q.submit_day >= days) {
            throw DataError("compute_stats: query " + q.query_id + " outside the day window");
        }
        ++per_day[static_cast<std::size_t>(q.submit_day)];
        bool all_stable = true;
        for (const auto& t : tables_of(q)) {
            if (lifespan_of_table(t) <= lifespan_floor_days) {
                all_stable = false;
                break;
            }
        }
        if (all_stable) ++stable;
    }
    stats.stable_table_ratio =
        workload.empty() ? 0.0 : static_cast<double>(stable) / static_cast<double>(workload.size());

    double ratio_sum = 0.0;
    for (int d = 1; d < days; ++d) {
        const std::size_t prev = per_day[static_cast<std::size_t>(d - 1)];
        const std::size_t cur = per_day[static_cast<std::size_t>(d)];
        if (prev == 0) {
            stats.had_zero_query_day = true;
            // undefined division: conservative 0 contribution
        } else {
            ratio_sum += static_cast<double>(cur) / static_cast<double>(prev);
        }
        if (cur == 0) stats.had_zero_query_day = true;
    }
    stats.query_inc_ratio = ratio_sum / static_cast<double>(days - 1);
    return stats;
}

double FilterThresholds::solved_growth_ratio() const {
    return std::pow(target_training_queries / min_queries_per_day,
                    1.0 / static_cast<double>(growth_horizon_days));
}

FilterDecision apply_filter(const WorkloadStats& stats, const FilterThresholds& thresholds) {
    FilterDecision d;
    d.growth_threshold_used = thresholds.effective_growth_ratio();
    d.r1_pass = stats.n_query >= thresholds.min_queries_per_day;
    d.r2_pass = stats.query_inc_ratio >= d.growth_threshold_used;
    d.r3_pass = stats.stable_table_ratio >= thresholds.min_stable_ratio;
    d.pass = d.r1_pass && d.r2_pass && d.r3_pass;
    return d;
}

}  // namespace loam
