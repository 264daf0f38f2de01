#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "loam/plan/plan_node.hpp"
#include "loam/plan/serialize.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

using namespace loam;

namespace {

PlanNode scan(const std::string& table, std::int64_t parts = 8, std::int64_t cols = 4) {
    PlanNode n;
    n.kind = OperatorKind::TableScan;
    n.table_id = table;
    n.n_partitions = parts;
    n.n_columns = cols;
    return n;
}

PlanNode node_of(OperatorKind kind, std::vector<PlanNode> children) {
    PlanNode n;
    n.kind = kind;
    n.children = std::move(children);
    if (is_join(kind)) {
        n.join_form = JoinForm::Inner;
        n.join_columns = {"a.c0", "b.c0"};
    }
    return n;
}

// Independent brute-force rewriter: repeatedly split the FIRST node with
// arity > 2 by grouping its two leftmost children, until binary.
PlanNode brute_force_binarize(PlanNode n) {
    for (auto& c : n.children) c = brute_force_binarize(c);
    while (n.children.size() > 2) {
        PlanNode merged = n;
        merged.children = {n.children[0], n.children[1]};
        // the merged pair keeps only already-binary children
        std::vector<PlanNode> rest(n.children.begin() + 2, n.children.end());
        n.children.clear();
        n.children.push_back(std::move(merged));
        for (auto& r : rest) n.children.push_back(std::move(r));
    }
    return n;
}

std::vector<std::string> leaf_tables_in_order(const PlanNode& plan) {
    std::vector<std::string> out;
    for_each_node(plan, [&](const PlanNode& n) {
        if (n.children.empty() && n.table_id) out.push_back(*n.table_id);
    });
    return out;
}

// Random n-ary tree with at most `budget` nodes.
PlanNode random_nary_tree(int budget, Rng& rng, int& leaf_counter) {
    if (budget <= 1 || rng.bernoulli(0.35)) {
        return scan("t" + std::to_string(leaf_counter++ % 3));
    }
    const int arity = 1 + static_cast<int>(rng.uniform_index(
                              static_cast<std::uint64_t>(std::min(4, budget - 1))));
    std::vector<PlanNode> kids;
    int per_child = (budget - 1) / arity;
    for (int i = 0; i < arity; ++i) {
        kids.push_back(random_nary_tree(std::max(1, per_child), rng, leaf_counter));
    }
    const OperatorKind kind = arity == 2 && rng.bernoulli(0.5) ? OperatorKind::HashJoin
                                                               : OperatorKind::HashAggregate;
    return node_of(kind, std::move(kids));
}

}  // namespace

TEST_CASE("canonicalize: 3-way join becomes left-deep with 5 nodes") {
    PlanNode j = node_of(OperatorKind::HashJoin, {scan("A"), scan("B"), scan("C")});
    const PlanNode out = canonicalize(j);
    CHECK(node_count(out) == 5);
    CHECK(out.kind == OperatorKind::HashJoin);
    CHECK(out.children.size() == 2);
    CHECK(out.children[0].kind == OperatorKind::HashJoin);
    CHECK(leaf_tables_in_order(out) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("canonicalize: already-binary plan is unchanged") {
    PlanNode plan = node_of(OperatorKind::Sink,
                            {node_of(OperatorKind::HashJoin, {scan("A"), scan("B")})});
    CHECK(canonicalize(plan) == plan);
}

TEST_CASE("canonicalize: agrees with a brute-force rewriter on random n-ary trees") {
    Rng rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        int leaf_counter = 0;
        const PlanNode tree = random_nary_tree(6, rng, leaf_counter);
        const PlanNode ours = canonicalize(tree);
        const PlanNode reference = brute_force_binarize(tree);
        CHECK(leaf_tables_in_order(ours) == leaf_tables_in_order(reference));
        std::size_t max_arity = 0;
        for_each_node(ours,
                      [&](const PlanNode& n) { max_arity = std::max(max_arity, n.children.size()); });
        CHECK(max_arity <= 2);
        CHECK(leaf_count(ours) == leaf_count(reference));
        CHECK(node_count(ours) == node_count(reference));
    }
}

TEST_CASE("canonicalize preserves the (kind, table_id) multiset of scans") {
    PlanNode agg = node_of(OperatorKind::HashAggregate,
                           {scan("A"), scan("B"), scan("C"), scan("A")});
    auto scans_of = [](const PlanNode& p) {
        std::map<std::string, int> m;
        for_each_node(p, [&](const PlanNode& n) {
            if (n.table_id) ++m[*n.table_id];
        });
        return m;
    };
    CHECK(scans_of(canonicalize(agg)) == scans_of(agg));
}

TEST_CASE("decompose_stages: single pipeline is one stage") {
    PlanNode plan = node_of(
        OperatorKind::Sink,
        {node_of(OperatorKind::Filter, {scan("A")})});
    const PlanNode staged = decompose_stages(canonicalize(plan));
    CHECK(stage_count(staged) == 1);
    CHECK(staged.stage_id == 0);
}

TEST_CASE("decompose_stages: join of two scans is three stages") {
    PlanNode plan = node_of(OperatorKind::HashJoin, {scan("A"), scan("B")});
    const PlanNode staged = decompose_stages(canonicalize(plan));
    CHECK(stage_count(staged) == 3);
    CHECK(staged.stage_id == 0);
    CHECK(staged.children[0].stage_id != staged.children[1].stage_id);
    CHECK(staged.children[0].stage_id != staged.stage_id);
}

namespace {

// Brute-force oracle: cut every reshuffle-node -> child edge and count the
// connected components of what remains.
std::size_t cut_enumeration_stage_count(const PlanNode& plan) {
    std::size_t cuts = 0;
    for_each_node(plan, [&](const PlanNode& n) {
        if (default_reshuffle_set().count(n.kind)) cuts += n.children.size();
    });
    return cuts + 1;  // cutting e edges of a tree leaves e+1 components
}

}  // namespace

TEST_CASE("decompose_stages: two joins and an aggregate over three scans give 6 stages") {
    PlanNode plan = node_of(
        OperatorKind::HashAggregate,
        {node_of(OperatorKind::HashJoin,
                 {node_of(OperatorKind::HashJoin, {scan("A"), scan("B")}), scan("C")})});
    const PlanNode staged = decompose_stages(canonicalize(plan));
    CHECK(stage_count(staged) == 6);
    CHECK(stage_count(staged) == cut_enumeration_stage_count(staged));
}

TEST_CASE("decompose_stages: stage count equals the cut-enumeration oracle on random plans") {
    Rng rng(11);
    for (int iter = 0; iter < 300; ++iter) {
        // random binary tree over mixed operators
        std::vector<PlanNode> nodes;
        const int n_leaves = 1 + static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < n_leaves; ++i) nodes.push_back(scan("t" + std::to_string(i)));
        while (nodes.size() > 1) {
            static const OperatorKind kKinds[] = {
                OperatorKind::HashJoin, OperatorKind::MergeJoin, OperatorKind::NestedLoopJoin,
                OperatorKind::Filter,   OperatorKind::Sort,      OperatorKind::Exchange,
                OperatorKind::Project,  OperatorKind::HashAggregate};
            const OperatorKind k = kKinds[rng.uniform_index(8)];
            if (is_join(k) && nodes.size() >= 2) {
                PlanNode a = nodes.back();
                nodes.pop_back();
                PlanNode b = nodes.back();
                nodes.pop_back();
                nodes.push_back(node_of(k, {a, b}));
            } else {
                PlanNode a = nodes.back();
                nodes.pop_back();
                nodes.push_back(node_of(k, {a}));
            }
        }
        PlanNode staged = decompose_stages(canonicalize(nodes[0]));
        CHECK(stage_count(staged) == cut_enumeration_stage_count(staged));
        CHECK(stage_count(staged) == expected_stage_count(staged));
    }
}

TEST_CASE("decompose_stages is idempotent") {
    PlanNode plan = node_of(
        OperatorKind::Sink,
        {node_of(OperatorKind::HashAggregate,
                 {node_of(OperatorKind::HashJoin, {scan("A"), node_of(OperatorKind::Filter, {scan("B")})})})});
    const PlanNode once = decompose_stages(canonicalize(plan));
    const PlanNode twice = decompose_stages(once);
    CHECK(once == twice);
}

TEST_CASE("decompose_stages: nodes in one non-reshuffle chain share a stage") {
    PlanNode plan = node_of(
        OperatorKind::Sink,
        {node_of(OperatorKind::Project,
                 {node_of(OperatorKind::HashJoin, {scan("A"), scan("B")})})});
    const PlanNode staged = decompose_stages(canonicalize(plan));
    CHECK(staged.stage_id == staged.children[0].stage_id);               // Sink = Project
    CHECK(staged.children[0].stage_id == staged.children[0].children[0].stage_id);  // = HashJoin
}

TEST_CASE("reshuffle set is configurable and queryable") {
    CHECK(default_reshuffle_set().count(OperatorKind::HashJoin) == 1);
    CHECK(default_reshuffle_set().count(OperatorKind::NestedLoopJoin) == 0);
    ReshuffleSet custom = {OperatorKind::Filter};
    PlanNode plan = node_of(OperatorKind::Filter, {scan("A")});
    const PlanNode staged = decompose_stages(canonicalize(plan), custom);
    CHECK(stage_count(staged) == 2);
}

TEST_CASE("validate_plan rejects malformed nodes") {
    PlanNode bad_scan;
    bad_scan.kind = OperatorKind::TableScan;  // missing attrs
    CHECK_THROWS_AS(validate_plan(bad_scan), StructuralError);

    PlanNode bad_join = node_of(OperatorKind::HashJoin, {scan("A")});
    CHECK_THROWS_AS(validate_plan(bad_join), StructuralError);

    PlanNode ok = node_of(OperatorKind::HashJoin, {scan("A"), scan("B")});
    CHECK_NOTHROW(validate_plan(ok));
}

TEST_CASE("repository: serialization round-trips and enforces invariants") {
    PlanNode plan =
        decompose_stages(canonicalize(node_of(OperatorKind::HashJoin, {scan("A"), scan("B")})));
    ExecutionRecord rec;
    rec.query_id = "q1";
    rec.plan = plan;
    rec.plan_kind = PlanKind::Default;
    rec.cpu_cost = 123.5;
    rec.day = 3;
    for_each_node(plan, [&](const PlanNode& n) {
        EnvironmentVector e;
        e.cpu_idle = 0.4 + 0.01 * n.stage_id;
        rec.stage_envs[n.stage_id] = e;
    });

    HistoricalRepository repo("proj");
    repo.append(rec);

    std::stringstream buf;
    write_repository(repo, buf);
    const HistoricalRepository back = read_repository(buf, "proj");
    REQUIRE(back.size() == 1);
    CHECK(back.records()[0].plan == rec.plan);
    CHECK(back.records()[0].cpu_cost == rec.cpu_cost);
    CHECK(back.records()[0].stage_envs == rec.stage_envs);

    // invariant: cpu_cost must be positive
    ExecutionRecord bad = rec;
    bad.cpu_cost = 0.0;
    CHECK_THROWS_AS(repo.append(bad), DataError);

    // invariant: stage_envs must cover every stage
    ExecutionRecord missing_env = rec;
    missing_env.stage_envs.erase(missing_env.stage_envs.begin());
    CHECK_THROWS_AS(repo.append(missing_env), DataError);

    // invariant: appends ordered by day
    ExecutionRecord earlier = rec;
    earlier.day = 1;
    CHECK_THROWS_AS(repo.append(earlier), DataError);
}
