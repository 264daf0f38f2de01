#include "loam/sim/warehouse.hpp"

#include <algorithm>
#include <cmath>

#include "loam/util/errors.hpp"

namespace loam {

void ProjectSpec::validate() const {
    if (n_tables < 1 || n_templates < 1 || n_days < 1) {
        throw ConfigError("ProjectSpec: counts must be >= 1");
    }
    if (template_tables_min < 1 || template_tables_min > n_tables) {
        throw ConfigError("ProjectSpec: template table range infeasible for " +
                          std::to_string(n_tables) + " tables");
    }
    if (template_tables_max < template_tables_min) {
        throw ConfigError("ProjectSpec: template_tables_max < template_tables_min");
    }
    if (n_filter_constants < 1) throw ConfigError("ProjectSpec: need >= 1 filter constant");
    if (planner_misestimation < 0.0 || planner_misestimation > 1.0) {
        throw ConfigError("ProjectSpec: planner_misestimation must be in [0,1]");
    }
}

namespace {

Schema make_schema(const ProjectSpec& spec) {
    Rng rng(derive_seed(spec.rng_seed, "schema"));
    Schema schema;
    schema.schema_ref = spec.project_id;
    for (int i = 0; i < spec.n_tables; ++i) {
        TableInfo t;
        t.table_id = "t" + std::to_string(i);
        t.n_rows = std::max<std::int64_t>(1, spec.table_sizes.sample_int(rng));
        t.n_columns = std::max<std::int64_t>(2, spec.n_columns_per_table.sample_int(rng));
        t.n_partitions = std::max<std::int64_t>(1, spec.table_partitions.sample_int(rng));
        t.lifespan_days = std::max<std::int64_t>(1, spec.table_lifespans.sample_int(rng));
        schema.tables.push_back(std::move(t));
    }
    return schema;
}

std::vector<QueryTemplate> make_templates(const ProjectSpec& spec, const Schema& schema) {
    Rng rng(derive_seed(spec.rng_seed, "templates"));
    std::vector<QueryTemplate> out;
    const int k_max = std::min(spec.template_tables_max, spec.n_tables);
    for (int t = 0; t < spec.n_templates; ++t) {
        QueryTemplate tmpl;
        tmpl.template_id = "tpl" + std::to_string(t);
        const int k = static_cast<int>(rng.uniform_int(spec.template_tables_min, k_max));

        // Sample k distinct tables, then optionally duplicate one inner
        // position so the spool knob has something to share.
        std::vector<int> table_idx(static_cast<std::size_t>(spec.n_tables));
        for (int i = 0; i < spec.n_tables; ++i) table_idx[static_cast<std::size_t>(i)] = i;
        rng.shuffle(table_idx);
        std::vector<const TableInfo*> tables;
        for (int i = 0; i < k; ++i) {
            tables.push_back(&schema.tables[static_cast<std::size_t>(table_idx[static_cast<std::size_t>(i)])]);
        }
        if (k >= 3 && rng.bernoulli(spec.template_duplicate_prob)) {
            tables[static_cast<std::size_t>(k - 1)] = tables[1];
        }
        for (const auto* tab : tables) tmpl.table_ids.push_back(tab->table_id);

        for (int i = 0; i + 1 < k; ++i) {
            QueryTemplate::JoinEdge e;
            const TableInfo& lt = *tables[static_cast<std::size_t>(i)];
            const TableInfo& rt = *tables[static_cast<std::size_t>(i + 1)];
            e.left_column = lt.column_name(rng.uniform_int(0, lt.n_columns - 1));
            e.right_column = rt.column_name(rng.uniform_int(0, rt.n_columns - 1));
            tmpl.joins.push_back(std::move(e));
        }

        tmpl.filter.table_index = 0;
        tmpl.filter.column = tables[0]->partition_column();
        tmpl.filter.functions = {FilterFunction::Eq};
        if (rng.bernoulli(0.5)) {
            static constexpr FilterFunction kExtra[4] = {FilterFunction::Ge, FilterFunction::Le,
                                                         FilterFunction::Like, FilterFunction::In};
            tmpl.filter.functions.push_back(kExtra[rng.uniform_index(4)]);
        }
        tmpl.filter.selectivity.resize(static_cast<std::size_t>(spec.n_filter_constants));
        for (auto& s : tmpl.filter.selectivity) {
            s = rng.log_uniform(spec.filter_selectivity_lo, spec.filter_selectivity_hi);
        }

        if (rng.bernoulli(spec.template_aggregate_prob)) {
            tmpl.has_aggregate = true;
            const TableInfo& last = *tables[static_cast<std::size_t>(k - 1)];
            tmpl.groupby_column = last.column_name(rng.uniform_int(0, last.n_columns - 1));
            tmpl.agg_column = last.column_name(rng.uniform_int(0, last.n_columns - 1));
            static constexpr AggFunction kFuncs[5] = {AggFunction::Sum, AggFunction::Count,
                                                      AggFunction::Avg, AggFunction::Min,
                                                      AggFunction::Max};
            tmpl.agg_function = kFuncs[rng.uniform_index(5)];
        }
        out.push_back(std::move(tmpl));
    }
    return out;
}

}  // namespace

SyntheticWarehouse::SyntheticWarehouse(ProjectSpec spec, CostOracleSpec oracle_spec,
                                       EnvironmentModelParams env_params)
    : spec_(std::move(spec)),
      oracle_spec_(std::move(oracle_spec)),
      env_params_(env_params),
      templates_(),
      oracle_(
          [&] {
              spec_.validate();
              return make_schema(spec_);
          }(),
          oracle_spec_, derive_seed(spec_.rng_seed, "world"), spec_.planner_misestimation),
      planner_(oracle_, spec_.planner_rules),
      project_env_(env_params_),
      cluster_env_(env_params_),
      env_rng_(derive_seed(spec_.rng_seed, "env")),
      cluster_rng_(derive_seed(spec_.rng_seed, "cluster")),
      noise_rng_(derive_seed(spec_.rng_seed, "noise")) {
    templates_ = make_templates(spec_, oracle_.schema());
    project_env_.reset(env_rng_);
    cluster_env_.reset(cluster_rng_);
}

const QueryTemplate& SyntheticWarehouse::template_by_id(const std::string& id) const {
    for (const auto& t : templates_) {
        if (t.template_id == id) return t;
    }
    throw DataError("SyntheticWarehouse: unknown template " + id);
}

int SyntheticWarehouse::query_param(const Query& q) const {
    const auto it = q.parameters.find("c");
    if (it == q.parameters.end()) throw DataError("query " + q.query_id + " lacks parameter c");
    return static_cast<int>(it->second);
}

QueryPlan SyntheticWarehouse::default_plan(const Query& q) const {
    return planner_.default_plan(template_by_id(q.template_id), query_param(q));
}

QueryPlan SyntheticWarehouse::plan_with_knobs(const Query& q, const PlannerKnobs& knobs) const {
    return planner_.build_plan(template_by_id(q.template_id), query_param(q), knobs);
}

ExecutionRecord SyntheticWarehouse::execute_plan(const QueryPlan& staged_plan,
                                                 const std::string& query_id, std::int64_t day,
                                                 PlanKind kind) {
    if (kind == PlanKind::Default) {
        ++default_executions_;
    } else {
        ++candidate_executions_;
    }
    ExecutionRecord rec = oracle_.execute(staged_plan, query_id, day, project_env_, noise_rng_);
    rec.plan_kind = kind;
    return rec;
}

std::vector<ExecutionRecord> SyntheticWarehouse::flighting_replay(const QueryPlan& staged_plan,
                                                                  std::size_t n_runs, Rng& rng) {
    if (n_runs == 0) throw ArgumentError("flighting_replay: n_runs must be positive");
    std::vector<ExecutionRecord> out;
    out.reserve(n_runs);
    for (std::size_t i = 0; i < n_runs; ++i) {
        ++candidate_executions_;
        EnvironmentProcess env(env_params_);
        env.reset(rng);
        ExecutionRecord rec = oracle_.execute(staged_plan, "replay", 0, env, rng);
        rec.plan_kind = PlanKind::Candidate;
        out.push_back(std::move(rec));
    }
    return out;
}

EnvironmentVector SyntheticWarehouse::sample_environment(std::int64_t t, Rng& rng) const {
    return loam::sample_environment(env_params_, t, rng);
}

std::vector<EnvironmentVector> SyntheticWarehouse::cluster_window(std::size_t n_ticks) {
    return cluster_env_.trace(n_ticks, cluster_rng_);
}

EnvironmentVector SyntheticWarehouse::cluster_instant() { return cluster_env_.step(cluster_rng_); }

std::vector<Query> SyntheticWarehouse::generate_workload() const {
    std::vector<Query> workload;
    Rng workload_rng(derive_seed(spec_.rng_seed, "workload"));
    for (int day = 0; day < spec_.n_days; ++day) {
        const std::int64_t n = std::max<std::int64_t>(0, spec_.queries_per_day.sample_int(workload_rng));
        for (std::int64_t i = 0; i < n; ++i) {
            Query q;
            q.query_id = "q" + std::to_string(day) + "_" + std::to_string(i);
            q.template_id =
                templates_[workload_rng.uniform_index(templates_.size())].template_id;
            q.parameters["c"] =
                static_cast<double>(workload_rng.uniform_index(
                    static_cast<std::uint64_t>(spec_.n_filter_constants)));
            q.submit_day = day;
            workload.push_back(std::move(q));
        }
    }
    return workload;
}

GeneratedProject SyntheticWarehouse::generate_project() {
    GeneratedProject out;
    out.schema = schema();
    out.templates = templates_;
    out.repository = HistoricalRepository(spec_.project_id);
    out.workload = generate_workload();

    for (const auto& q : out.workload) {
        const QueryPlan plan = default_plan(q);
        ExecutionRecord rec = execute_plan(plan, q.query_id, q.submit_day, PlanKind::Default);
        out.repository.append(std::move(rec));
    }
    return out;
}

}  // namespace loam
