#pragma once

#include <string>
#include <vector>

namespace loam {

struct ReportResult {
    std::string report_path;
    std::string theorem_csv_path;
    bool empty_test_set = false;
    // Recomputed from per_query.csv (independent of summary.csv).
    double mean_cost_loam = 0.0;
    double mean_cost_default = 0.0;
    double mean_cost_best = 0.0;
    double mean_rel_dev_loam = 0.0;
    double mean_rel_dev_best = 0.0;
    double mean_rel_dev_default = 0.0;
    std::size_t n_queries = 0;
    std::size_t speedups = 0;
    std::size_t slowdowns = 0;
};

// Renders a human-readable summary plus plot-data series from a completed
// pipeline artifact directory. All aggregates are recomputed from the raw
// per-query CSV. Includes the Theorem 1 battery table (built from the fitted
// candidate distributions) and the ranker curves when present. Missing
// inputs raise DataError listing the absent files.
ReportResult write_report(const std::string& artifact_dir, std::size_t theorem_instances = 50,
                          std::size_t theorem_draws = 20000, std::uint64_t theorem_seed = 7);

}  // namespace loam
