#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loam/plan/plan_node.hpp"
#include "loam/sim/environment_vector.hpp"

namespace loam {

// A templated query instance: (template_id, parameters) fixes the default
// plan for a given schema and explorer configuration.
struct Query {
    std::string query_id;
    std::string template_id;
    std::map<std::string, double> parameters;
    std::int64_t submit_day = 0;
};

enum class PlanKind : std::uint8_t { Default, Candidate };

inline const char* to_string(PlanKind k) { return k == PlanKind::Default ? "default" : "candidate"; }

// One logged execution: the plan that ran, the per-stage environment
// averages observed while it ran, and the CPU cost it was billed.
struct ExecutionRecord {
    std::string query_id;
    QueryPlan plan;
    PlanKind plan_kind = PlanKind::Default;
    std::map<int, EnvironmentVector> stage_envs;
    double cpu_cost = 0.0;
    std::int64_t day = 0;

    // cpu_cost > 0 and stage_envs covers every stage id in the plan.
    void check() const;
};

// Append-only log of executions for one project, ordered by day.
class HistoricalRepository {
public:
    HistoricalRepository() = default;
    explicit HistoricalRepository(std::string schema_ref) : schema_ref_(std::move(schema_ref)) {}

    void append(ExecutionRecord record);

    const std::vector<ExecutionRecord>& records() const { return records_; }
    const std::string& schema_ref() const { return schema_ref_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

private:
    std::vector<ExecutionRecord> records_;
    std::string schema_ref_;
};

}  // namespace loam
