#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "loam/plan/plan_node.hpp"
#include "loam/plan/repository.hpp"
#include "loam/sim/environment.hpp"
#include "loam/sim/schema.hpp"

namespace loam {

// World-truth cost law configuration. Costs follow
//   cost = eps * sum_stages base(stage) * g(env_stage),
// with base summing per-operator coefficients scaled by touched data volume,
// g an affine multiplier on the normalized environment clamped at g_floor,
// and eps ~ LogNormal(0, noise_sigma^2) drawn once per execution.
struct CostOracleSpec {
    std::map<OperatorKind, double> op_coefficients;  // cost units per row touched

    // Affine coefficients of g on (cpu_idle, io_wait, norm_load5, mem_usage),
    // as deviations from the neutral point (0.5, 0.05, 0.5, 0.5).
    double env_sensitivity[4] = {-0.5, 0.6, 0.5, 0.25};
    double g_floor = 0.1;

    double noise_sigma = 0.25;

    // log-space min/max used to normalize LOAD5 inside g.
    double load5_log_lo = 0.55 - 3.5;
    double load5_log_hi = 0.55 + 3.5;

    // Join fanout / aggregate reduction / filter residual ranges for the
    // seeded world stats.
    double fanout_lo = 0.05;
    double fanout_hi = 2.0;
    double agg_reduction_lo = 0.002;
    double agg_reduction_hi = 0.3;
    double residual_lo = 0.3;
    double residual_hi = 1.0;

    // Stage window length: 1 + floor(log2(1 + base)) ticks, capped here.
    int max_stage_window_ticks = 30;

    // Sort work is superlinear: volume = rows * log2(2 + rows) / sort_log_scale,
    // which makes merge joins genuinely cheaper than hash joins below a few
    // thousand rows and dearer above.
    double sort_log_scale = 16.0;

    // Hash joins touch the build side harder: volume = (1 + build_side_factor) * L + R.
    double hash_build_side_factor = 0.5;

    // A grouping aggregate without a co-partitioning Exchange directly below
    // pays volume * (1 + min(cap, rows / rows_scale)); break-even sits at
    // rows_scale * exchange_coef / (agg_coef)-ish, i.e. a couple thousand rows.
    double agg_no_exchange_penalty_cap = 2.0;
    double agg_no_exchange_penalty_rows = 4000.0;

    static CostOracleSpec defaults();
};

// noise_sigma giving a target relative standard deviation of cost under a
// fixed environment: rsd^2 = exp(sigma^2) - 1.
double noise_sigma_for_rsd(double target_rsd);

// Statistics provider for the volume walk. The true stats are seeded world
// properties; the planner's view blends them with an independent draw
// (misestimation), which is where the improvement space comes from.
class VolumeStats {
public:
    VolumeStats(std::uint64_t world_seed, const CostOracleSpec& spec, double misestimation);

    double true_fanout(const std::string& col_a, const std::string& col_b) const;
    double planner_fanout(const std::string& col_a, const std::string& col_b) const;
    double true_agg_reduction(const std::string& groupby_column) const;
    double planner_agg_reduction(const std::string& groupby_column) const;
    double true_residual(const std::string& filter_column) const;
    double planner_residual(const std::string& filter_column) const;

private:
    double seeded_log_uniform(const std::string& salt, const std::string& key, double lo,
                              double hi) const;
    double blend(double truth, double alt) const;

    std::uint64_t world_seed_;
    double fanout_lo_, fanout_hi_;
    double agg_lo_, agg_hi_;
    double residual_lo_, residual_hi_;
    double misestimation_;
};

// Ground-truth cost oracle over a fixed schema. Pure given an explicit RNG
// and environment process; execution counting lives in SyntheticWarehouse.
class CostOracle {
public:
    CostOracle(Schema schema, CostOracleSpec spec, std::uint64_t world_seed,
               double planner_misestimation);

    // Noise- and environment-free cost of a staged plan (eps = 1, g = 1).
    double base_cost(const QueryPlan& staged_plan) const;
    // Same split per stage id.
    std::map<int, double> stage_base_costs(const QueryPlan& staged_plan) const;

    // Environment multiplier at one stage-average snapshot.
    double env_multiplier(const EnvironmentVector& env) const;
    double normalize_load5(double load5) const;

    // Runs the plan: assigns each stage a window on the environment trace,
    // averages the metrics over it, applies g and the multiplicative noise.
    ExecutionRecord execute(const QueryPlan& staged_plan, const std::string& query_id,
                            std::int64_t day, EnvironmentProcess& env, Rng& rng) const;

    // True output rows of a subtree (volume walk on world stats).
    double true_output_rows(const PlanNode& node) const;
    // Planner's estimate of the same, with fanout misestimation applied.
    double planner_output_rows(const PlanNode& node) const;

    // The planner's statistics-free rough cost estimate of a whole plan.
    double rough_cost_estimate(const QueryPlan& plan) const;

    const CostOracleSpec& spec() const { return spec_; }
    const VolumeStats& stats() const { return stats_; }
    const Schema& schema() const { return schema_; }

private:
    double walk_cost(const PlanNode& node, bool planner_view,
                     std::map<std::string, int>& spooled, std::map<int, double>* per_stage) const;
    double output_rows(const PlanNode& node, bool planner_view) const;
    double node_processing_volume(const PlanNode& node, bool planner_view) const;

    Schema schema_;
    CostOracleSpec spec_;
    VolumeStats stats_;
};

}  // namespace loam
