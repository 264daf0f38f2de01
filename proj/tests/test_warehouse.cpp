#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "loam/plan/serialize.hpp"
#include "loam/sim/warehouse.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/stats.hpp"

using namespace loam;

namespace {

ProjectSpec small_spec(std::uint64_t seed = 1) {
    ProjectSpec spec;
    spec.project_id = "test";
    spec.n_tables = 8;
    spec.n_templates = 5;
    spec.queries_per_day = DistSpec::constant(4);
    spec.n_days = 6;
    spec.rng_seed = seed;
    return spec;
}

EnvironmentModelParams frozen_env() {
    EnvironmentModelParams env;
    env.variance_scale = 0.0;
    return env;
}

CostOracleSpec noiseless_oracle() {
    CostOracleSpec spec = CostOracleSpec::defaults();
    spec.noise_sigma = 0.0;
    return spec;
}

}  // namespace

TEST_CASE("generate_project: same seed twice gives byte-identical repositories") {
    SyntheticWarehouse w1(small_spec(17));
    SyntheticWarehouse w2(small_spec(17));
    const GeneratedProject p1 = w1.generate_project();
    const GeneratedProject p2 = w2.generate_project();
    std::stringstream s1, s2;
    write_repository(p1.repository, s1);
    write_repository(p2.repository, s2);
    CHECK(s1.str() == s2.str());
    CHECK(!s1.str().empty());
}

TEST_CASE("generate_project: record count equals queries_per_day * n_days for a constant rate") {
    ProjectSpec spec = small_spec(3);
    spec.queries_per_day = DistSpec::constant(2500);
    spec.n_days = 30;
    SyntheticWarehouse w(spec);
    // The workload stream alone is cheap; counting holds for it and the
    // repository gets exactly one record per query.
    CHECK(w.generate_workload().size() == 75000);

    ProjectSpec executed = small_spec(3);
    executed.queries_per_day = DistSpec::constant(50);
    executed.n_days = 30;
    SyntheticWarehouse we(executed);
    CHECK(we.generate_project().repository.size() == 50 * 30);
}

TEST_CASE("generate_project: every query uses one of the generated templates") {
    ProjectSpec spec = small_spec(5);
    spec.n_templates = 5;
    spec.queries_per_day = DistSpec::constant(40);
    spec.n_days = 25;  // 1000 queries
    SyntheticWarehouse w(spec);
    std::set<std::string> valid;
    for (const auto& t : w.templates()) valid.insert(t.template_id);
    CHECK(valid.size() == 5);
    const auto workload = w.generate_workload();
    CHECK(workload.size() == 1000);
    for (const auto& q : workload) CHECK(valid.count(q.template_id) == 1);
}

TEST_CASE("generate_project: infeasible spec raises a configuration error") {
    ProjectSpec spec = small_spec();
    spec.n_tables = 1;
    spec.template_tables_min = 3;
    CHECK_THROWS_AS(SyntheticWarehouse{spec}, ConfigError);
}

TEST_CASE("sample_environment: zero process variance returns the configured means") {
    EnvironmentModelParams env = frozen_env();
    EnvironmentProcess proc(env);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const EnvironmentVector e = proc.step(rng);
        CHECK(e.cpu_idle == 0.5);
        CHECK(e.io_wait == 0.05);
        CHECK(e.load5 == doctest::Approx(std::exp(0.55)));
        CHECK(e.mem_usage == 0.5);
    }
}

TEST_CASE("sample_environment: long-run means hit the configured targets") {
    EnvironmentModelParams env;
    EnvironmentProcess proc(env);
    Rng rng(99);
    proc.reset(rng);
    double sum_idle = 0.0, sum_io = 0.0, sum_mem = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const EnvironmentVector e = proc.step(rng);
        sum_idle += e.cpu_idle;
        sum_io += e.io_wait;
        sum_mem += e.mem_usage;
    }
    CHECK(std::fabs(sum_idle / n - 0.5) < 0.01);
    CHECK(std::fabs(sum_io / n - 0.05) < 0.01);
    CHECK(std::fabs(sum_mem / n - 0.5) < 0.01);
}

TEST_CASE("execute_plan: noiseless neutral environment gives exactly the base cost") {
    SyntheticWarehouse w(small_spec(7), noiseless_oracle(), frozen_env());
    const auto workload = w.generate_workload();
    REQUIRE(!workload.empty());
    const QueryPlan plan = w.default_plan(workload[0]);
    const double base = w.oracle().base_cost(plan);
    const ExecutionRecord rec = w.execute_plan(plan, workload[0].query_id, 0, PlanKind::Default);
    CHECK(rec.cpu_cost == doctest::Approx(base).epsilon(1e-12));
    CHECK(base > 0.0);
}

TEST_CASE("execute_plan: unstaged plan is a precondition error") {
    SyntheticWarehouse w(small_spec(7));
    const auto workload = w.generate_workload();
    QueryPlan plan = w.default_plan(workload[0]);
    for_each_node(plan, [](PlanNode& n) { n.stage_id = -1; });
    CHECK_THROWS_AS(w.execute_plan(plan, "q", 0, PlanKind::Default), PreconditionError);
}

TEST_CASE("oracle: higher load / lower idle strictly increases cost (noise off)") {
    SyntheticWarehouse w(small_spec(7), noiseless_oracle(), frozen_env());
    const auto workload = w.generate_workload();
    const QueryPlan plan = w.default_plan(workload[0]);

    EnvironmentModelParams heavy = frozen_env();
    heavy.log_load5.mean = 0.55 + 1.0;
    heavy.cpu_idle.mean = 0.2;
    EnvironmentModelParams light = frozen_env();
    light.log_load5.mean = 0.55 - 1.0;
    light.cpu_idle.mean = 0.8;

    SyntheticWarehouse w_heavy(small_spec(7), noiseless_oracle(), heavy);
    SyntheticWarehouse w_light(small_spec(7), noiseless_oracle(), light);
    const double cost_heavy =
        w_heavy.execute_plan(plan, "q", 0, PlanKind::Default).cpu_cost;
    const double cost_light =
        w_light.execute_plan(plan, "q", 0, PlanKind::Default).cpu_cost;
    const double cost_mid = w.execute_plan(plan, "q", 0, PlanKind::Default).cpu_cost;
    CHECK(cost_heavy > cost_mid);
    CHECK(cost_mid > cost_light);
}

TEST_CASE("oracle: g is monotone in load5 and cpu_idle (finite differences)") {
    SyntheticWarehouse w(small_spec(7));
    const CostOracle& oracle = w.oracle();
    const double h = 1e-5;
    for (double base_load : {0.3, 1.0, 5.0}) {
        for (double idle : {0.1, 0.5, 0.9}) {
            EnvironmentVector e;
            e.load5 = base_load;
            e.cpu_idle = idle;
            EnvironmentVector e_load = e;
            e_load.load5 = base_load * (1.0 + h);
            CHECK(oracle.env_multiplier(e_load) >= oracle.env_multiplier(e));
            EnvironmentVector e_idle = e;
            e_idle.cpu_idle = idle + h;
            CHECK(oracle.env_multiplier(e_idle) <= oracle.env_multiplier(e));
        }
    }
}

TEST_CASE("oracle: replayed recurring query reaches the configured relative deviation") {
    for (double target : {0.2, 0.5}) {
        CostOracleSpec oracle = CostOracleSpec::defaults();
        oracle.noise_sigma = noise_sigma_for_rsd(target);
        oracle.env_sensitivity[0] = oracle.env_sensitivity[1] = 0.0;
        oracle.env_sensitivity[2] = oracle.env_sensitivity[3] = 0.0;
        SyntheticWarehouse w(small_spec(7), oracle, frozen_env());
        const auto workload = w.generate_workload();
        const QueryPlan plan = w.default_plan(workload[0]);
        Rng rng(2);
        const auto recs = w.flighting_replay(plan, 200, rng);
        std::vector<double> costs;
        for (const auto& r : recs) costs.push_back(r.cpu_cost);
        const double rsd = stddev(costs) / mean(costs);
        CHECK(rsd == doctest::Approx(target).epsilon(0.2));
    }
}

namespace {

// Numerical-integration oracle for E[cost]: E[eps] * sum_s base_s * E[g],
// with E[g] integrated over the stationary clamped-Gaussian marginals.
double integrated_mean_cost(const SyntheticWarehouse& w, const QueryPlan& plan) {
    const CostOracleSpec& spec = w.oracle().spec();
    const EnvironmentModelParams& env = w.env_params();

    auto clamped_mean = [](const MetricProcessParams& p, double scale) {
        const double sd = p.stationary_sd * scale;
        if (sd == 0.0 || !p.clamp01) return p.mean;
        // trapezoid over +-10 sd with clamping inside the integrand
        const int n = 200000;
        const double lo = p.mean - 10 * sd, hi = p.mean + 10 * sd;
        double acc = 0.0, prev = 0.0;
        bool first = true;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + (hi - lo) * i / n;
            const double z = (x - p.mean) / sd;
            const double density = std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * M_PI));
            const double cur = std::clamp(x, 0.0, 1.0) * density;
            if (!first) acc += 0.5 * (prev + cur) * (hi - lo) / n;
            prev = cur;
            first = false;
        }
        return acc;
    };

    const double e_idle = clamped_mean(env.cpu_idle, env.variance_scale);
    const double e_io = clamped_mean(env.io_wait, env.variance_scale);
    const double e_mem = clamped_mean(env.mem_usage, env.variance_scale);
    // LOAD5 aggregates in log space: the normalized feature is linear in the
    // Gaussian state, so its mean maps exactly.
    const double e_load_norm = (env.log_load5.mean - spec.load5_log_lo) /
                               (spec.load5_log_hi - spec.load5_log_lo);

    const double g = 1.0 + spec.env_sensitivity[0] * (e_idle - 0.5) +
                     spec.env_sensitivity[1] * (e_io - 0.05) +
                     spec.env_sensitivity[2] * (e_load_norm - 0.5) +
                     spec.env_sensitivity[3] * (e_mem - 0.5);
    const double e_eps = std::exp(0.5 * spec.noise_sigma * spec.noise_sigma);
    return w.oracle().base_cost(plan) * g * e_eps;
}

}  // namespace

TEST_CASE("oracle: empirical mean cost over 1e4 draws is within 1% of numerical integration") {
    SyntheticWarehouse w(small_spec(21));
    const auto workload = w.generate_workload();
    const QueryPlan plan = w.default_plan(workload[0]);
    Rng rng(5);
    const auto recs = w.flighting_replay(plan, 10000, rng);
    std::vector<double> costs;
    for (const auto& r : recs) costs.push_back(r.cpu_cost);
    const double analytic = integrated_mean_cost(w, plan);
    CHECK(mean(costs) == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("flighting_replay: edge cases") {
    SyntheticWarehouse w(small_spec(7), noiseless_oracle(), frozen_env());
    const auto workload = w.generate_workload();
    const QueryPlan plan = w.default_plan(workload[0]);
    Rng rng(3);
    CHECK(w.flighting_replay(plan, 1, rng).size() == 1);
    CHECK_THROWS_AS(w.flighting_replay(plan, 0, rng), ArgumentError);

    // noiseless, frozen environment: all replays identical
    const auto recs = w.flighting_replay(plan, 100, rng);
    for (const auto& r : recs) CHECK(r.cpu_cost == recs[0].cpu_cost);
}

TEST_CASE("oracle cost is strictly positive across random plans and replays") {
    SyntheticWarehouse w(small_spec(23));
    const auto workload = w.generate_workload();
    Rng rng(11);
    for (std::size_t i = 0; i < std::min<std::size_t>(workload.size(), 20); ++i) {
        const QueryPlan plan = w.default_plan(workload[i]);
        const auto recs = w.flighting_replay(plan, 5, rng);
        for (const auto& r : recs) CHECK(r.cpu_cost > 0.0);
    }
}

TEST_CASE("warehouse counts executions by plan kind") {
    SyntheticWarehouse w(small_spec(7));
    const auto workload = w.generate_workload();
    const QueryPlan plan = w.default_plan(workload[0]);
    CHECK(w.executions(PlanKind::Default) == 0);
    CHECK(w.executions(PlanKind::Candidate) == 0);
    w.execute_plan(plan, "q", 0, PlanKind::Default);
    Rng rng(1);
    w.flighting_replay(plan, 3, rng);
    CHECK(w.executions(PlanKind::Default) == 1);
    CHECK(w.executions(PlanKind::Candidate) == 3);
}

TEST_CASE("planner knobs change plan structure in the advertised families") {
    ProjectSpec spec = small_spec(29);
    spec.template_duplicate_prob = 1.0;   // guarantee a duplicated table somewhere
    spec.template_aggregate_prob = 1.0;   // guarantee aggregates
    spec.template_tables_min = 3;
    SyntheticWarehouse w(spec);
    const auto workload = w.generate_workload();

    bool saw_merge_with_sort = false, saw_exchange_flip = false;
    bool saw_default_spool = false, saw_spool_removed = false;
    for (std::size_t i = 0; i < std::min<std::size_t>(workload.size(), 30); ++i) {
        const Query& q = workload[i];
        const QueryPlan def = w.default_plan(q);
        auto count_kind = [](const QueryPlan& p, OperatorKind k) {
            std::size_t n = 0;
            for_each_node(p, [&](const PlanNode& node) {
                if (node.kind == k) ++n;
            });
            return n;
        };

        PlannerKnobs merge;
        merge.prefer_merge_join = true;
        const QueryPlan pm = w.plan_with_knobs(q, merge);
        const std::size_t merges = count_kind(pm, OperatorKind::MergeJoin);
        if (merges > 0 && count_kind(pm, OperatorKind::Sort) >= 2 * merges &&
            count_kind(def, OperatorKind::MergeJoin) != merges) {
            saw_merge_with_sort = true;
        }

        PlannerKnobs elide;
        elide.elide_exchange_before_agg = true;
        if (count_kind(w.plan_with_knobs(q, elide), OperatorKind::Exchange) !=
            count_kind(def, OperatorKind::Exchange)) {
            saw_exchange_flip = true;
        }

        // spool is the native rule for duplicated tables; the knob removes it
        if (count_kind(def, OperatorKind::Spool) > 0) {
            saw_default_spool = true;
            PlannerKnobs no_spool;
            no_spool.spool_shared_subtrees = true;
            if (count_kind(w.plan_with_knobs(q, no_spool), OperatorKind::Spool) == 0) {
                saw_spool_removed = true;
            }
        }
    }
    CHECK(saw_merge_with_sort);
    CHECK(saw_exchange_flip);
    CHECK(saw_default_spool);
    CHECK(saw_spool_removed);
}

TEST_CASE("default plans validate and are fully staged") {
    SyntheticWarehouse w(small_spec(31));
    const auto workload = w.generate_workload();
    for (std::size_t i = 0; i < std::min<std::size_t>(workload.size(), 20); ++i) {
        const QueryPlan plan = w.default_plan(workload[i]);
        CHECK_NOTHROW(validate_plan(plan));
        for_each_node(plan, [&](const PlanNode& n) { CHECK(n.stage_id >= 0); });
        CHECK(stage_count(plan) == expected_stage_count(plan));
        CHECK(w.oracle().rough_cost_estimate(plan) > 0.0);
    }
}
