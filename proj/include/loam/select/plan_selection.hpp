#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "loam/model/checkpoint.hpp"
#include "loam/sim/warehouse.hpp"

namespace loam {

enum class EnvSource : std::uint8_t {
    HistoricalMean,      // empirical per-feature mean over training stage envs
    FixedDefault,        // (0.5, 0.05, 0.5, 0.5)
    ClusterExpectation,  // mean of the last-24h cluster-wide trace (CE)
    ClusterInstant,      // cluster value at optimization time (CB)
};

EnvSource env_source_from_string(const std::string& s);
const char* to_string(EnvSource s);

// The fixed environment instance used for every candidate at inference, in
// normalized [0,1]^4 space (cpu_idle, io_wait, norm load5, mem_usage).
struct RepresentativeEnvironment {
    Eigen::Vector4d values;
    EnvSource source = EnvSource::FixedDefault;
};

// Ticks in the CE window: 24 hours of 20-second samples.
inline constexpr std::size_t kClusterWindowTicks = 24 * 60 * 3;

// historical_mean averages each normalized metric over every stage env of
// every record (error on an empty repo); CE/CB read the warehouse's cluster
// trace. The encoder supplies the LOAD5 normalization.
RepresentativeEnvironment build_representative_env(const HistoricalRepository& repo,
                                                   EnvSource source, const PlanEncoder& encoder,
                                                   SyntheticWarehouse* warehouse = nullptr);

struct SelectionResult {
    std::size_t chosen_index = 0;
    std::vector<double> predicted_costs;  // real scale
};

// Scores every candidate at e_r and returns the argmin; ties break to the
// lowest index (the default plan sits at index 0). Never executes a plan.
SelectionResult select_plan(const TrainedModel& model, const PlanEncoder& encoder,
                            std::span<const QueryPlan> candidates,
                            const RepresentativeEnvironment& e_r);

// One line of the decisions log (JSONL).
std::string decision_log_line(const std::string& query_id,
                              std::span<const QueryPlan> candidates,
                              const SelectionResult& result, const RepresentativeEnvironment& e_r);

}  // namespace loam
