#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loam/plan/repository.hpp"
#include "loam/sim/cost_oracle.hpp"
#include "loam/sim/environment.hpp"
#include "loam/sim/planner.hpp"
#include "loam/sim/schema.hpp"

namespace loam {

// Everything needed to synthesize one project. The seed fully determines the
// generated schema, templates, workload and execution history.
struct ProjectSpec {
    std::string project_id = "project";
    int n_tables = 12;
    DistSpec n_columns_per_table = DistSpec::uniform_int(5, 30);
    DistSpec table_sizes = DistSpec::log_uniform(1e3, 1e7);         // rows
    DistSpec table_partitions = DistSpec::uniform_int(16, 512);
    DistSpec table_lifespans = DistSpec::uniform_int(2, 400);       // days
    int n_templates = 8;
    DistSpec queries_per_day = DistSpec::uniform_int(30, 60);
    int n_days = 30;
    std::uint64_t rng_seed = 1;

    // World-shaping knobs.
    double planner_misestimation = 0.7;  // 0 = perfect planner stats, 1 = uncorrelated
    int template_tables_min = 2;
    int template_tables_max = 6;
    double template_duplicate_prob = 0.2;   // chance a template reuses a table
    double template_aggregate_prob = 0.5;
    int n_filter_constants = 64;
    double filter_selectivity_lo = 0.02;
    double filter_selectivity_hi = 1.0;
    PlannerRules planner_rules;

    void validate() const;  // throws ConfigError
};

struct GeneratedProject {
    Schema schema;
    std::vector<QueryTemplate> templates;
    std::vector<Query> workload;
    HistoricalRepository repository;
};

// Ground-truth world: schema + templates + planner + cost oracle + the
// environment processes, plus execution counters for the
// no-candidate-execution-during-training assertion.
class SyntheticWarehouse {
public:
    SyntheticWarehouse(ProjectSpec spec, CostOracleSpec oracle_spec = CostOracleSpec::defaults(),
                       EnvironmentModelParams env_params = {});

    const ProjectSpec& project_spec() const { return spec_; }
    const Schema& schema() const { return oracle_.schema(); }
    const CostOracle& oracle() const { return oracle_; }
    const RuleBasedPlanner& planner() const { return planner_; }
    const EnvironmentModelParams& env_params() const { return env_params_; }
    const std::vector<QueryTemplate>& templates() const { return templates_; }
    const QueryTemplate& template_by_id(const std::string& id) const;

    // The seeded query stream alone (no execution).
    std::vector<Query> generate_workload() const;

    // Workload + one default-plan execution record per query.
    GeneratedProject generate_project();

    QueryPlan default_plan(const Query& q) const;
    QueryPlan plan_with_knobs(const Query& q, const PlannerKnobs& knobs) const;

    // Executes a staged plan under the shared project environment process.
    ExecutionRecord execute_plan(const QueryPlan& staged_plan, const std::string& query_id,
                                 std::int64_t day, PlanKind kind);

    // n_runs independent executions, each under a freshly reset environment.
    std::vector<ExecutionRecord> flighting_replay(const QueryPlan& staged_plan,
                                                  std::size_t n_runs, Rng& rng);

    // One stationary draw at time index t (module-level sampling surface).
    EnvironmentVector sample_environment(std::int64_t t, Rng& rng) const;

    // Cluster-wide trace for the CE/CB representative-environment variants.
    std::vector<EnvironmentVector> cluster_window(std::size_t n_ticks);
    EnvironmentVector cluster_instant();

    std::size_t executions(PlanKind kind) const {
        return kind == PlanKind::Default ? default_executions_ : candidate_executions_;
    }

private:
    int query_param(const Query& q) const;

    ProjectSpec spec_;
    CostOracleSpec oracle_spec_;
    EnvironmentModelParams env_params_;
    std::vector<QueryTemplate> templates_;
    CostOracle oracle_;
    RuleBasedPlanner planner_;
    EnvironmentProcess project_env_;
    EnvironmentProcess cluster_env_;
    Rng env_rng_;
    Rng cluster_rng_;
    Rng noise_rng_;
    std::size_t default_executions_ = 0;
    std::size_t candidate_executions_ = 0;
};

}  // namespace loam
