#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "loam/rank/metrics.hpp"
#include "loam/rank/ranker.hpp"
#include "loam/rank/workload_stats.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

using namespace loam;

namespace {

std::vector<Query> constant_workload(int per_day, int days) {
    std::vector<Query> out;
    for (int d = 0; d < days; ++d) {
        for (int i = 0; i < per_day; ++i) {
            Query q;
            q.query_id = "q" + std::to_string(d) + "_" + std::to_string(i);
            q.template_id = "t";
            q.submit_day = d;
            out.push_back(std::move(q));
        }
    }
    return out;
}

const std::function<std::vector<std::string>(const Query&)> kOneTable =
    [](const Query&) { return std::vector<std::string>{"tbl"}; };

}  // namespace

TEST_CASE("compute_stats: constant 2500/day over 10 days") {
    const auto workload = constant_workload(2500, 10);
    const WorkloadStats stats = compute_stats(
        workload, 10, kOneTable, [](const std::string&) { return std::int64_t{40}; }, 30);
    CHECK(stats.n_query == 2500.0);
    CHECK(stats.query_inc_ratio == 1.0);
    CHECK(stats.stable_table_ratio == 1.0);  // lifespan 40 > 30 for every table
    CHECK(!stats.had_zero_query_day);
}

TEST_CASE("compute_stats: 5% daily growth ratio matches direct recomputation to 1e-9") {
    std::vector<Query> workload;
    const int days = 12;
    std::vector<int> per_day;
    double count = 400.0;
    for (int d = 0; d < days; ++d) {
        per_day.push_back(static_cast<int>(std::llround(count)));
        for (int i = 0; i < per_day.back(); ++i) {
            Query q;
            q.query_id = "q";
            q.submit_day = d;
            workload.push_back(std::move(q));
        }
        count *= 1.05;
    }
    const WorkloadStats stats = compute_stats(
        workload, days, kOneTable, [](const std::string&) { return std::int64_t{100}; }, 30);
    double expected = 0.0;
    for (int d = 1; d < days; ++d) {
        expected += static_cast<double>(per_day[static_cast<std::size_t>(d)]) /
                    static_cast<double>(per_day[static_cast<std::size_t>(d - 1)]);
    }
    expected /= days - 1;
    CHECK(std::fabs(stats.query_inc_ratio - expected) < 1e-9);
    CHECK(stats.query_inc_ratio == doctest::Approx(1.05).epsilon(0.005));
}

TEST_CASE("compute_stats: zero-query days contribute 0 and are flagged") {
    std::vector<Query> workload = constant_workload(10, 1);  // day 0 only
    for (auto& q : constant_workload(10, 1)) {
        Query moved = q;
        moved.submit_day = 2;
        workload.push_back(std::move(moved));
    }
    // days 0,1,2 with day 1 empty
    const WorkloadStats stats = compute_stats(
        workload, 3, kOneTable, [](const std::string&) { return std::int64_t{100}; }, 30);
    CHECK(stats.had_zero_query_day);
    // day1/day0 = 0, day2/day1 undefined -> contributes 0: ratio = 0/2
    CHECK(stats.query_inc_ratio == 0.0);
    CHECK_THROWS_AS(compute_stats(workload, 1, kOneTable,
                                  [](const std::string&) { return std::int64_t{100}; }, 30),
                    ArgumentError);
}

TEST_CASE("compute_stats: lifespan boundary is strict (> n days)") {
    const auto workload = constant_workload(5, 2);
    const WorkloadStats at_boundary = compute_stats(
        workload, 2, kOneTable, [](const std::string&) { return std::int64_t{30}; }, 30);
    CHECK(at_boundary.stable_table_ratio == 0.0);  // lifespan 30 is not > 30
    const WorkloadStats above = compute_stats(
        workload, 2, kOneTable, [](const std::string&) { return std::int64_t{31}; }, 30);
    CHECK(above.stable_table_ratio == 1.0);
}

TEST_CASE("filter: r solves N0 * r^30 = 10000 as 5^(1/30), to 1e-5") {
    FilterThresholds t;
    const double r = t.solved_growth_ratio();
    CHECK(std::fabs(r - std::pow(5.0, 1.0 / 30.0)) < 1e-12);
    // 5^(1/30) = 1.0551130..., i.e. 1.05511 at five decimals
    CHECK(std::fabs(r - 1.05511) < 1e-5);
    // numeric cross-check: bisection on f(r) = 2000 r^30 - 10000
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (2000.0 * std::pow(mid, 30) < 10000.0 ? lo : hi) = mid;
    }
    CHECK(r == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
}

TEST_CASE("filter: worked examples pass and fail exactly as stated") {
    WorkloadStats good;
    good.n_query = 2500;
    good.query_inc_ratio = 1.06;
    good.stable_table_ratio = 0.5;
    const FilterDecision d_good = apply_filter(good);
    CHECK(d_good.pass);
    CHECK(d_good.r1_pass);
    CHECK(d_good.r2_pass);
    CHECK(d_good.r3_pass);

    WorkloadStats flat = good;
    flat.query_inc_ratio = 1.00;
    const FilterDecision d_flat = apply_filter(flat);
    CHECK(!d_flat.pass);
    CHECK(d_flat.r1_pass);
    CHECK(!d_flat.r2_pass);  // 1.00 < 1.05513
    CHECK(d_flat.r3_pass);
}

TEST_CASE("filter is monotone: improving any metric never flips pass to fail") {
    Rng rng(7);
    const FilterThresholds thresholds;
    for (int iter = 0; iter < 500; ++iter) {
        WorkloadStats s;
        s.n_query = rng.uniform(0.0, 5000.0);
        s.query_inc_ratio = rng.uniform(0.8, 1.3);
        s.stable_table_ratio = rng.uniform();
        const FilterDecision base = apply_filter(s, thresholds);
        WorkloadStats improved = s;
        switch (rng.uniform_index(3)) {
            case 0: improved.n_query += rng.uniform(0.0, 2000.0); break;
            case 1: improved.query_inc_ratio += rng.uniform(0.0, 0.2); break;
            default: improved.stable_table_ratio =
                         std::min(1.0, improved.stable_table_ratio + rng.uniform());
        }
        const FilterDecision better = apply_filter(improved, thresholds);
        if (base.pass) CHECK(better.pass);
    }
}

namespace {

PlanNode scan(const std::string& t) {
    PlanNode n;
    n.kind = OperatorKind::TableScan;
    n.table_id = t;
    n.n_partitions = 4;
    n.n_columns = 3;
    return n;
}

PlanNode join(OperatorKind kind, PlanNode a, PlanNode b) {
    PlanNode n;
    n.kind = kind;
    n.join_form = JoinForm::Inner;
    n.join_columns = {"x", "y"};
    n.children.push_back(std::move(a));
    n.children.push_back(std::move(b));
    return n;
}

}  // namespace

TEST_CASE("signature: the worked pattern-count example") {
    // HashJoin(MergeJoin(TS, TS), TS): 5 operators, <MJ,TS> = 2, <HJ,MJ> = 1,
    // <HJ,TS> = 1
    const PlanNode plan = join(OperatorKind::HashJoin,
                               join(OperatorKind::MergeJoin, scan("a"), scan("b")), scan("c"));
    std::map<std::string, std::int64_t> rows = {{"a", 100}, {"b", 500}, {"c", 50}};
    const PlanSignature sig = make_signature(
        plan, [&](const std::string& t) { return rows.at(t); }, 12.5);
    CHECK(sig.total_operators == 5);
    CHECK(sig.pattern_counts.at({OperatorKind::MergeJoin, OperatorKind::TableScan}) == 2);
    CHECK(sig.pattern_counts.at({OperatorKind::HashJoin, OperatorKind::MergeJoin}) == 1);
    CHECK(sig.pattern_counts.at({OperatorKind::HashJoin, OperatorKind::TableScan}) == 1);
    CHECK(sig.pattern_counts.size() == 3);
    CHECK(sig.top3_table_sizes[0] == 500.0);
    CHECK(sig.top3_table_sizes[1] == 100.0);
    CHECK(sig.top3_table_sizes[2] == 50.0);
    CHECK(sig.default_cost == 12.5);
}

TEST_CASE("signature: single node plan has an empty pattern map") {
    const PlanSignature sig = make_signature(
        scan("a"), [](const std::string&) { return std::int64_t{10}; }, 1.0);
    CHECK(sig.total_operators == 1);
    CHECK(sig.pattern_counts.empty());
    CHECK(sig.top3_table_sizes[1] == 0.0);  // zero-padded
}

TEST_CASE("signature: pattern counts sum to node count - 1 on random trees") {
    Rng rng(13);
    for (int iter = 0; iter < 1000; ++iter) {
        // random binary tree
        std::vector<PlanNode> nodes;
        const int n_leaves = 1 + static_cast<int>(rng.uniform_index(6));
        for (int i = 0; i < n_leaves; ++i) nodes.push_back(scan("t" + std::to_string(i)));
        while (nodes.size() > 1) {
            PlanNode a = nodes.back();
            nodes.pop_back();
            PlanNode b = nodes.back();
            nodes.pop_back();
            nodes.push_back(join(rng.bernoulli(0.5) ? OperatorKind::HashJoin
                                                    : OperatorKind::MergeJoin,
                                 std::move(a), std::move(b)));
        }
        const PlanSignature sig = make_signature(
            nodes[0], [](const std::string&) { return std::int64_t{10}; }, 1.0);
        CHECK(sig.pattern_total() == sig.total_operators - 1);
    }
}

TEST_CASE("signature features carry no identifier strings") {
    // renaming every table leaves the feature vector untouched
    const PlanNode plan = join(OperatorKind::HashJoin, scan("alpha"), scan("beta"));
    PlanNode renamed = plan;
    for_each_node(renamed, [](PlanNode& n) {
        if (n.table_id) *n.table_id = "renamed_" + *n.table_id;
    });
    std::map<std::string, std::int64_t> rows = {{"alpha", 100}, {"beta", 50},
                                                {"renamed_alpha", 100}, {"renamed_beta", 50}};
    const auto rows_of = [&](const std::string& t) { return rows.at(t); };
    const Eigen::VectorXd a = signature_features(make_signature(plan, rows_of, 3.0));
    const Eigen::VectorXd b = signature_features(make_signature(renamed, rows_of, 3.0));
    CHECK(a == b);
}

TEST_CASE("gbdt: constant labels predict the constant") {
    Eigen::MatrixXd x(20, 3);
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform();
    }
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 7.25);
    GbdtRegressor model;
    model.fit(x, y, {});
    for (int i = 0; i < 20; ++i) {
        CHECK(model.predict_row(x.row(i)) == doctest::Approx(7.25).epsilon(1e-3));
    }
}

TEST_CASE("ranker: recovers the planted rule label = 10 * total_operators with R^2 >= 0.95") {
    Rng rng(17);
    std::vector<PlanSignature> sigs;
    std::vector<double> labels;
    for (int i = 0; i < 300; ++i) {
        std::vector<PlanNode> nodes;
        const int n_leaves = 1 + static_cast<int>(rng.uniform_index(6));
        for (int l = 0; l < n_leaves; ++l) nodes.push_back(scan("t" + std::to_string(l)));
        while (nodes.size() > 1) {
            PlanNode a = nodes.back();
            nodes.pop_back();
            PlanNode b = nodes.back();
            nodes.pop_back();
            nodes.push_back(join(rng.bernoulli(0.5) ? OperatorKind::HashJoin
                                                    : OperatorKind::MergeJoin,
                                 std::move(a), std::move(b)));
        }
        const PlanSignature sig = make_signature(
            nodes[0], [&](const std::string&) { return std::int64_t{rng.uniform_int(10, 10000)}; },
            rng.uniform(1.0, 100.0));
        sigs.push_back(sig);
        labels.push_back(10.0 * sig.total_operators);
    }
    const std::size_t split = 240;
    const RankerModel model = RankerModel::train(
        std::span(sigs).subspan(0, split), std::span(labels).subspan(0, split), 2);

    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y =
        std::accumulate(labels.begin() + split, labels.end(), 0.0) / (labels.size() - split);
    for (std::size_t i = split; i < sigs.size(); ++i) {
        const double pred = model.estimate(sigs[i]);
        ss_res += (labels[i] - pred) * (labels[i] - pred);
        ss_tot += (labels[i] - mean_y) * (labels[i] - mean_y);
    }
    CHECK(1.0 - ss_res / ss_tot >= 0.95);
}

TEST_CASE("ranker: training preconditions") {
    CHECK_THROWS_AS(RankerModel::train({}, {}, 2), ArgumentError);
    std::vector<PlanSignature> sigs = {make_signature(
        scan("a"), [](const std::string&) { return std::int64_t{10}; }, 1.0)};
    std::vector<double> labels = {1.0};
    CHECK_THROWS_AS(RankerModel::train(sigs, labels, 1), ConfigError);
}

TEST_CASE("rank_projects: identical projects keep id order; planted gap ranks first") {
    Rng rng(23);
    std::vector<PlanSignature> sigs;
    std::vector<double> labels;
    // two clusters: big plans with label 0.4, small plans with label 0.1
    for (int i = 0; i < 200; ++i) {
        const bool big = i % 2 == 0;
        std::vector<PlanNode> nodes;
        const int n_leaves = big ? 5 : 2;
        for (int l = 0; l < n_leaves; ++l) nodes.push_back(scan("t" + std::to_string(l)));
        while (nodes.size() > 1) {
            PlanNode a = nodes.back();
            nodes.pop_back();
            PlanNode b = nodes.back();
            nodes.pop_back();
            nodes.push_back(join(OperatorKind::HashJoin, std::move(a), std::move(b)));
        }
        sigs.push_back(make_signature(
            nodes[0], [](const std::string&) { return std::int64_t{100}; }, big ? 50.0 : 5.0));
        labels.push_back(big ? 0.4 : 0.1);
    }
    const RankerModel model = RankerModel::train(sigs, labels, 2);

    ProjectWorkloadSample strong{"p_strong", {}};
    ProjectWorkloadSample weak{"p_weak", {}};
    for (int i = 0; i < 200; i += 2) strong.signatures.push_back(sigs[static_cast<std::size_t>(i)]);
    for (int i = 1; i < 200; i += 2) weak.signatures.push_back(sigs[static_cast<std::size_t>(i)]);
    std::vector<ProjectWorkloadSample> projects = {weak, strong};
    const auto ranking = rank_projects(model, projects);
    REQUIRE(ranking.size() == 2);
    CHECK(ranking[0].project_id == "p_strong");
    CHECK(ranking[0].mean_estimated_improvement > ranking[1].mean_estimated_improvement);

    // identical projects tie; order = id order
    std::vector<ProjectWorkloadSample> same = {{"b", strong.signatures},
                                               {"a", strong.signatures},
                                               {"c", strong.signatures}};
    const auto tied = rank_projects(model, same);
    CHECK(tied[0].project_id == "a");
    CHECK(tied[1].project_id == "b");
    CHECK(tied[2].project_id == "c");

    const auto single = rank_projects(model, std::span(&strong, 1));
    CHECK(single.size() == 1);
}

TEST_CASE("recall/ndcg: boundary identities") {
    const std::vector<double> truth = {0.5, 0.1, 0.9, 0.3, 0.7};
    std::vector<std::size_t> perfect = {2, 4, 0, 3, 1};  // descending truth order
    // k = N: recall 1 for any ranking
    std::vector<std::size_t> arbitrary = {1, 3, 0, 4, 2};
    CHECK(recall_at(arbitrary, truth, 5, 3) == 1.0);
    CHECK(ndcg_at(perfect, truth, 5) == doctest::Approx(1.0));
    CHECK(ndcg_at(perfect, truth, 3) == doctest::Approx(1.0));
    CHECK(recall_at(perfect, truth, 2, 2) == 1.0);
    CHECK(recall_at(arbitrary, truth, 1, 1) == 0.0);
    CHECK_THROWS_AS(recall_at(perfect, truth, 0, 1), ArgumentError);
    CHECK_THROWS_AS(recall_at(perfect, truth, 1, 0), ArgumentError);
    CHECK_THROWS_AS(recall_at(perfect, truth, 6, 1), ArgumentError);
}

TEST_CASE("random baselines match a permutation Monte Carlo within 3 standard errors") {
    Rng rng(29);
    const std::size_t n_projects = 15;
    std::vector<double> truth;
    for (std::size_t i = 0; i < n_projects; ++i) truth.push_back(rng.uniform(0.0, 2.0));

    std::vector<std::size_t> perm(n_projects);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    const std::size_t n_perms = 20000;
    for (std::size_t k = 1; k <= 5; ++k) {
        const RandomBaselines base = random_baselines(truth, k, k);
        double sum_recall = 0.0, sum_sq_recall = 0.0, sum_ndcg = 0.0, sum_sq_ndcg = 0.0;
        Rng mc(31 + k);
        for (std::size_t it = 0; it < n_perms; ++it) {
            mc.shuffle(perm);
            const double r = recall_at(perm, truth, k, k);
            const double n = ndcg_at(perm, truth, k);
            sum_recall += r;
            sum_sq_recall += r * r;
            sum_ndcg += n;
            sum_sq_ndcg += n * n;
        }
        const double m_r = sum_recall / n_perms;
        const double se_r = std::sqrt((sum_sq_recall / n_perms - m_r * m_r) / n_perms);
        const double m_n = sum_ndcg / n_perms;
        const double se_n = std::sqrt((sum_sq_ndcg / n_perms - m_n * m_n) / n_perms);
        CHECK(std::fabs(base.expected_recall - m_r) <= 3.0 * se_r + 1e-12);
        CHECK(std::fabs(base.expected_ndcg - m_n) <= 3.0 * se_n + 1e-12);
        CHECK(base.expected_recall == doctest::Approx(static_cast<double>(k) / 15.0));
    }
}

TEST_CASE("ndcg depends on rel values (asserted, not denied)") {
    const std::vector<double> truth = {1.0, 0.5, 0.25};
    std::vector<double> rescaled = {2.0, 1.0, 0.5};  // positive rescale changes NDCG
    const std::vector<std::size_t> ranking = {1, 0, 2};
    CHECK(ndcg_at(ranking, truth, 3) != ndcg_at(ranking, rescaled, 3));
    // recall depends only on membership: invariant under monotone rescale
    CHECK(recall_at(ranking, truth, 2, 2) == recall_at(ranking, rescaled, 2, 2));
}
