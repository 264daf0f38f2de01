#include "loam/sim/cost_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "loam/plan/serialize.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/hashing.hpp"

namespace loam {

CostOracleSpec CostOracleSpec::defaults() {
    CostOracleSpec s;
    s.op_coefficients = {
        {OperatorKind::TableScan, 1.0e-3},  {OperatorKind::Filter, 5.0e-4},
        {OperatorKind::Calc, 8.0e-4},       {OperatorKind::HashJoin, 4.0e-3},
        {OperatorKind::MergeJoin, 2.0e-3},  {OperatorKind::NestedLoopJoin, 4.0e-3},
        {OperatorKind::HashAggregate, 3.0e-3}, {OperatorKind::SortAggregate, 3.5e-3},
        {OperatorKind::Sort, 2.5e-3},       {OperatorKind::Exchange, 1.5e-3},
        {OperatorKind::Project, 3.0e-4},    {OperatorKind::Sink, 1.0e-4},
        {OperatorKind::Spool, 8.0e-4},
    };
    return s;
}

double noise_sigma_for_rsd(double target_rsd) {
    if (target_rsd < 0.0) throw ArgumentError("noise_sigma_for_rsd: negative target");
    return std::sqrt(std::log(1.0 + target_rsd * target_rsd));
}

VolumeStats::VolumeStats(std::uint64_t world_seed, const CostOracleSpec& spec,
                         double misestimation)
    : world_seed_(world_seed),
      fanout_lo_(spec.fanout_lo),
      fanout_hi_(spec.fanout_hi),
      agg_lo_(spec.agg_reduction_lo),
      agg_hi_(spec.agg_reduction_hi),
      residual_lo_(spec.residual_lo),
      residual_hi_(spec.residual_hi),
      misestimation_(misestimation) {}

double VolumeStats::seeded_log_uniform(const std::string& salt, const std::string& key, double lo,
                                       double hi) const {
    const std::uint64_t h = hash64(salt + "#" + key, world_seed_);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

double VolumeStats::blend(double truth, double alt) const {
    return std::exp((1.0 - misestimation_) * std::log(truth) + misestimation_ * std::log(alt));
}

namespace {
std::string sorted_pair(const std::string& a, const std::string& b) {
    return a <= b ? a + "|" + b : b + "|" + a;
}
}  // namespace

double VolumeStats::true_fanout(const std::string& a, const std::string& b) const {
    return seeded_log_uniform("fanout", sorted_pair(a, b), fanout_lo_, fanout_hi_);
}

double VolumeStats::planner_fanout(const std::string& a, const std::string& b) const {
    const double alt = seeded_log_uniform("fanout_alt", sorted_pair(a, b), fanout_lo_, fanout_hi_);
    return blend(true_fanout(a, b), alt);
}

double VolumeStats::true_agg_reduction(const std::string& col) const {
    return seeded_log_uniform("agg", col, agg_lo_, agg_hi_);
}

double VolumeStats::planner_agg_reduction(const std::string& col) const {
    const double alt = seeded_log_uniform("agg_alt", col, agg_lo_, agg_hi_);
    return blend(true_agg_reduction(col), alt);
}

double VolumeStats::true_residual(const std::string& col) const {
    return seeded_log_uniform("residual", col, residual_lo_, residual_hi_);
}

double VolumeStats::planner_residual(const std::string& col) const {
    const double alt = seeded_log_uniform("residual_alt", col, residual_lo_, residual_hi_);
    return blend(true_residual(col), alt);
}

CostOracle::CostOracle(Schema schema, CostOracleSpec spec, std::uint64_t world_seed,
                       double planner_misestimation)
    : schema_(std::move(schema)),
      spec_(std::move(spec)),
      stats_(world_seed, spec_, planner_misestimation) {}

double CostOracle::output_rows(const PlanNode& node, bool planner_view) const {
    switch (node.kind) {
        case OperatorKind::TableScan: {
            const TableInfo& t = schema_.table(*node.table_id);
            const double prune =
                static_cast<double>(*node.n_partitions) / static_cast<double>(t.n_partitions);
            return static_cast<double>(t.n_rows) * prune;
        }
        case OperatorKind::Filter:
        case OperatorKind::Calc: {
            double in = 0.0;
            for (const auto& c : node.children) in += output_rows(c, planner_view);
            if (node.filter_columns.empty()) return in;
            const auto& col = node.filter_columns.front();
            const double r = planner_view ? stats_.planner_residual(col) : stats_.true_residual(col);
            return in * r;
        }
        case OperatorKind::HashJoin:
        case OperatorKind::MergeJoin:
        case OperatorKind::NestedLoopJoin: {
            if (node.children.size() != 2 || node.join_columns.size() < 2) {
                throw PreconditionError("join node needs two children and two join columns");
            }
            const double l = output_rows(node.children[0], planner_view);
            const double r = output_rows(node.children[1], planner_view);
            const double f = planner_view
                                 ? stats_.planner_fanout(node.join_columns[0], node.join_columns[1])
                                 : stats_.true_fanout(node.join_columns[0], node.join_columns[1]);
            return std::max(l, r) * f;
        }
        case OperatorKind::HashAggregate:
        case OperatorKind::SortAggregate: {
            double in = 0.0;
            for (const auto& c : node.children) in += output_rows(c, planner_view);
            const std::string col = node.groupby_columns.empty() ? "" : node.groupby_columns.front();
            const double red =
                planner_view ? stats_.planner_agg_reduction(col) : stats_.true_agg_reduction(col);
            return in * red;
        }
        default: {
            double in = 0.0;
            for (const auto& c : node.children) in += output_rows(c, planner_view);
            return in;
        }
    }
}

double CostOracle::true_output_rows(const PlanNode& node) const { return output_rows(node, false); }
double CostOracle::planner_output_rows(const PlanNode& node) const { return output_rows(node, true); }

double CostOracle::node_processing_volume(const PlanNode& node, bool planner_view) const {
    if (node.kind == OperatorKind::TableScan) return output_rows(node, planner_view);
    double in = 0.0;
    for (const auto& c : node.children) in += output_rows(c, planner_view);
    switch (node.kind) {
        case OperatorKind::NestedLoopJoin:
            if (node.children.size() == 2) {
                in += output_rows(node.children[0], planner_view) *
                      output_rows(node.children[1], planner_view) / 1000.0;
            }
            return in;
        case OperatorKind::HashJoin:
            if (node.children.size() == 2) {
                // build side (left child) is touched harder
                in += spec_.hash_build_side_factor * output_rows(node.children[0], planner_view);
            }
            return in;
        case OperatorKind::Sort:
            return in * std::log2(2.0 + in) / spec_.sort_log_scale;
        case OperatorKind::HashAggregate:
        case OperatorKind::SortAggregate: {
            const bool co_partitioned =
                !node.children.empty() && node.children[0].kind == OperatorKind::Exchange;
            if (!co_partitioned) {
                in *= 1.0 + std::min(spec_.agg_no_exchange_penalty_cap,
                                     in / spec_.agg_no_exchange_penalty_rows);
            }
            return in;
        }
        default:
            return in;
    }
}

double CostOracle::walk_cost(const PlanNode& node, bool planner_view,
                             std::map<std::string, int>& spooled,
                             std::map<int, double>* per_stage) const {
    // A spooled subtree is materialized once; later identical occurrences pay
    // only the spool read.
    if (node.kind == OperatorKind::Spool && node.children.size() == 1) {
        const std::string key = plan_key(node.children[0]);
        const double rows = output_rows(node.children[0], planner_view);
        const double read = spec_.op_coefficients.at(OperatorKind::Spool) * rows;
        if (per_stage) (*per_stage)[node.stage_id] += read;
        double total = read;
        if (spooled[key]++ == 0) {
            total += walk_cost(node.children[0], planner_view, spooled, per_stage);
        }
        return total;
    }
    const auto it = spec_.op_coefficients.find(node.kind);
    if (it == spec_.op_coefficients.end()) {
        throw ConfigError("CostOracle: no coefficient for operator " +
                          std::string(to_string(node.kind)));
    }
    const double own = it->second * node_processing_volume(node, planner_view);
    if (per_stage) (*per_stage)[node.stage_id] += own;
    double total = own;
    for (const auto& c : node.children) total += walk_cost(c, planner_view, spooled, per_stage);
    return total;
}

double CostOracle::base_cost(const QueryPlan& staged_plan) const {
    std::map<std::string, int> spooled;
    return walk_cost(staged_plan, false, spooled, nullptr);
}

std::map<int, double> CostOracle::stage_base_costs(const QueryPlan& staged_plan) const {
    std::map<int, double> per_stage;
    std::map<std::string, int> spooled;
    walk_cost(staged_plan, false, spooled, &per_stage);
    return per_stage;
}

double CostOracle::rough_cost_estimate(const QueryPlan& plan) const {
    std::map<std::string, int> spooled;
    return walk_cost(plan, true, spooled, nullptr);
}

double CostOracle::normalize_load5(double load5) const {
    const double z =
        (std::log(load5) - spec_.load5_log_lo) / (spec_.load5_log_hi - spec_.load5_log_lo);
    return std::clamp(z, 0.0, 1.0);
}

double CostOracle::env_multiplier(const EnvironmentVector& env) const {
    const double feat[4] = {env.cpu_idle, env.io_wait, normalize_load5(env.load5), env.mem_usage};
    constexpr double kNeutral[4] = {0.5, 0.05, 0.5, 0.5};
    double g = 1.0;
    for (int i = 0; i < 4; ++i) g += spec_.env_sensitivity[i] * (feat[i] - kNeutral[i]);
    return std::max(g, spec_.g_floor);
}

ExecutionRecord CostOracle::execute(const QueryPlan& staged_plan, const std::string& query_id,
                                    std::int64_t day, EnvironmentProcess& env, Rng& rng) const {
    bool has_stages = true;
    for_each_node(staged_plan, [&](const PlanNode& n) {
        if (n.stage_id < 0) has_stages = false;
    });
    if (!has_stages) throw PreconditionError("CostOracle::execute: plan lacks stage assignment");

    const auto stage_bases = stage_base_costs(staged_plan);

    ExecutionRecord rec;
    rec.query_id = query_id;
    rec.plan = staged_plan;
    rec.day = day;

    // Each stage averages the trace over its own window; window length grows
    // with the stage's base cost. Windows are laid out in stage-id order.
    double cost = 0.0;
    for (const auto& [stage, base] : stage_bases) {
        const int ticks = 1 + std::min(spec_.max_stage_window_ticks - 1,
                                       static_cast<int>(std::floor(std::log2(1.0 + base))));
        double sum_idle = 0.0, sum_io = 0.0, sum_log_load = 0.0, sum_mem = 0.0;
        for (int t = 0; t < ticks; ++t) {
            const EnvironmentVector e = env.step(rng);
            sum_idle += e.cpu_idle;
            sum_io += e.io_wait;
            sum_log_load += std::log(e.load5);
            sum_mem += e.mem_usage;
        }
        EnvironmentVector avg;
        avg.cpu_idle = sum_idle / ticks;
        avg.io_wait = sum_io / ticks;
        avg.load5 = std::exp(sum_log_load / ticks);  // LOAD5 averages in log space
        avg.mem_usage = sum_mem / ticks;
        rec.stage_envs[stage] = avg;
        cost += base * env_multiplier(avg);
    }

    const double eps = spec_.noise_sigma > 0.0 ? rng.lognormal(0.0, spec_.noise_sigma) : 1.0;
    rec.cpu_cost = cost * eps;
    rec.check();
    return rec;
}

}  // namespace loam
