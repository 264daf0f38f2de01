#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "loam/encode/plan_encoder.hpp"
#include "loam/plan/serialize.hpp"
#include "loam/sim/warehouse.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

using namespace loam;

namespace {

ProjectSpec tiny_spec(std::uint64_t seed = 1) {
    ProjectSpec spec;
    spec.n_tables = 6;
    spec.n_templates = 4;
    spec.queries_per_day = DistSpec::constant(6);
    spec.n_days = 4;
    spec.rng_seed = seed;
    return spec;
}

HistoricalRepository generate_repo(std::uint64_t seed = 1) {
    SyntheticWarehouse w(tiny_spec(seed));
    return w.generate_project().repository;
}

}  // namespace

TEST_CASE("hash encoder: deterministic, one hot per segment for a single id") {
    const HashEncoder enc = HashEncoder::from_master_seed(5, 10, 42);
    const std::vector<std::string> id = {"tbl_7"};
    const Eigen::VectorXd a = enc.encode(id);
    const Eigen::VectorXd b = enc.encode(id);
    CHECK(a == b);
    CHECK(a.sum() == 5.0);  // exactly one hot per segment
    for (int s = 0; s < 5; ++s) {
        CHECK(a.segment(s * 10, 10).sum() == 1.0);
    }
}

TEST_CASE("hash encoder: union of identifiers, empty set is the zero sentinel") {
    const HashEncoder enc = HashEncoder::from_master_seed(5, 10, 42);
    const std::vector<std::string> ab = {"a", "b"};
    const std::vector<std::string> a = {"a"};
    const std::vector<std::string> b = {"b"};
    const Eigen::VectorXd u = enc.encode(ab);
    const Eigen::VectorXd ua = enc.encode(a);
    const Eigen::VectorXd ub = enc.encode(b);
    CHECK(u == (ua.array().max(ub.array())).matrix());
    CHECK(enc.encode(std::vector<std::string>{}).sum() == 0.0);
}

TEST_CASE("hash encoder: full-vector collision rate at defaults is near the analytic 1e-5") {
    // 1e3-id subsample of 1e4 distinct ids, brute-force pairwise comparison.
    const HashEncoder enc = HashEncoder::from_master_seed(5, 10, 7);
    std::vector<std::array<int, 5>> signatures;
    for (int i = 0; i < 1000; ++i) {
        const std::vector<std::string> id = {"id_" + std::to_string(i * 10)};  // spread over 1e4
        const Eigen::VectorXd v = enc.encode(id);
        std::array<int, 5> sig{};
        for (int s = 0; s < 5; ++s) {
            for (int p = 0; p < 10; ++p) {
                if (v[s * 10 + p] == 1.0) sig[static_cast<std::size_t>(s)] = p;
            }
        }
        signatures.push_back(sig);
    }
    std::size_t collisions = 0, pairs = 0;
    for (std::size_t i = 0; i < signatures.size(); ++i) {
        for (std::size_t j = i + 1; j < signatures.size(); ++j) {
            ++pairs;
            if (signatures[i] == signatures[j]) ++collisions;
        }
    }
    CHECK(static_cast<double>(collisions) / static_cast<double>(pairs) <= 2e-5);
}

TEST_CASE("fit_layout + encode_node: fitted minima normalize to zero") {
    const HistoricalRepository repo = generate_repo(3);
    const FeatureLayout layout = fit_layout(repo);
    const PlanEncoder encoder(layout);

    // find the scan with the smallest partitions / columns in the corpus
    std::int64_t min_parts = INT64_MAX, min_cols = INT64_MAX;
    for (const auto& rec : repo.records()) {
        for_each_node(rec.plan, [&](const PlanNode& n) {
            if (n.kind == OperatorKind::TableScan) {
                min_parts = std::min(min_parts, *n.n_partitions);
                min_cols = std::min(min_cols, *n.n_columns);
            }
        });
    }
    PlanNode scan;
    scan.kind = OperatorKind::TableScan;
    scan.table_id = "t0";
    scan.n_partitions = min_parts;
    scan.n_columns = min_cols;
    const Eigen::VectorXd row = encoder.encode_node(scan, std::nullopt);
    const int w = layout.hash_segments * layout.hash_segment_width;
    CHECK(row[layout.scan.offset + w] == 0.0);
    CHECK(row[layout.scan.offset + w + 1] == 0.0);
}

TEST_CASE("encode_node: bounded environment metrics appear verbatim") {
    const HistoricalRepository repo = generate_repo(3);
    const PlanEncoder encoder(fit_layout(repo));
    PlanNode scan;
    scan.kind = OperatorKind::TableScan;
    scan.table_id = "t1";
    scan.n_partitions = 4;
    scan.n_columns = 3;
    EnvironmentVector env;
    env.cpu_idle = 0.5;
    env.io_wait = 0.05;
    env.load5 = 1.0;
    env.mem_usage = 0.5;
    const Eigen::VectorXd row = encoder.encode_node(scan, env);
    const auto& layout = encoder.layout();
    CHECK(row[layout.environment.offset + 0] == 0.5);
    CHECK(row[layout.environment.offset + 1] == 0.05);
    CHECK(row[layout.environment.offset + 3] == 0.5);
}

TEST_CASE("encode: load5 feature equals min-max of log(load5), recomputed from raw logs") {
    const HistoricalRepository repo = generate_repo(5);
    const FeatureLayout layout = fit_layout(repo);
    const PlanEncoder encoder(layout);

    // independent recomputation of the bounds from the raw records
    double lo = 1e300, hi = -1e300;
    for (const auto& rec : repo.records()) {
        for (const auto& [stage, env] : rec.stage_envs) {
            lo = std::min(lo, std::log(env.load5));
            hi = std::max(hi, std::log(env.load5));
        }
    }

    std::size_t checked = 0;
    for (const auto& rec : repo.records()) {
        if (checked >= 100) break;
        const PlanFeatureTensor t = encoder.encode_plan(rec.plan, &rec.stage_envs);
        std::vector<const PlanNode*> nodes;
        for_each_node(rec.plan, [&](const PlanNode& n) { nodes.push_back(&n); });
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double raw = rec.stage_envs.at(nodes[i]->stage_id).load5;
            const double expected = (std::log(raw) - lo) / (hi - lo);
            CHECK(t.node_features(static_cast<Eigen::Index>(i), layout.environment.offset + 2) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("encode_plan: one-node plan gives a 1 x feature_dim tensor") {
    const PlanEncoder encoder(fit_layout(generate_repo(3)));
    PlanNode scan;
    scan.kind = OperatorKind::TableScan;
    scan.table_id = "t0";
    scan.n_partitions = 4;
    scan.n_columns = 3;
    scan.stage_id = 0;
    const PlanFeatureTensor t = encoder.encode_plan(scan, nullptr);
    CHECK(t.n_nodes() == 1);
    CHECK(t.node_features.cols() == encoder.layout().feature_dim);
    CHECK(t.topology(0, 0) == -1);
    CHECK(t.topology(0, 1) == -1);
}

TEST_CASE("encode_plan: a three-stage join plan has exactly three distinct environment blocks") {
    SyntheticWarehouse w(tiny_spec(9));
    const GeneratedProject project = w.generate_project();
    const PlanEncoder encoder(fit_layout(project.repository));

    // find a record whose plan has >= 3 stages
    for (const auto& rec : project.repository.records()) {
        if (stage_count(rec.plan) < 3) continue;
        const PlanFeatureTensor t = encoder.encode_plan(rec.plan, &rec.stage_envs);
        std::set<std::string> blocks;
        for (Eigen::Index i = 0; i < t.n_nodes(); ++i) {
            std::ostringstream key;
            for (int k = 0; k < 4; ++k) {
                key << t.node_features(i, encoder.layout().environment.offset + k) << '|';
            }
            blocks.insert(key.str());
        }
        CHECK(blocks.size() == stage_count(rec.plan));
        return;
    }
    FAIL("no multi-stage record found");
}

TEST_CASE("encode_plan: bit-identical rows after a serialization round trip") {
    SyntheticWarehouse w(tiny_spec(13));
    const GeneratedProject project = w.generate_project();
    const PlanEncoder encoder(fit_layout(project.repository));

    std::stringstream buf;
    write_repository(project.repository, buf);
    const HistoricalRepository reread = read_repository(buf);

    for (std::size_t i = 0; i < std::min<std::size_t>(project.repository.size(), 25); ++i) {
        const auto& original = project.repository.records()[i];
        const auto& roundtrip = reread.records()[i];
        const PlanFeatureTensor a = encoder.encode_plan(original.plan, &original.stage_envs);
        const PlanFeatureTensor b = encoder.encode_plan(roundtrip.plan, &roundtrip.stage_envs);
        CHECK(a.node_features == b.node_features);
        CHECK(a.topology == b.topology);
    }
}

TEST_CASE("encode_plan: missing stage environment is a data error") {
    const PlanEncoder encoder(fit_layout(generate_repo(3)));
    PlanNode scan;
    scan.kind = OperatorKind::TableScan;
    scan.table_id = "t0";
    scan.n_partitions = 4;
    scan.n_columns = 3;
    scan.stage_id = 7;
    std::map<int, EnvironmentVector> envs;  // lacks stage 7
    envs[0] = EnvironmentVector{};
    CHECK_THROWS_AS(encoder.encode_plan(scan, &envs), DataError);
}

TEST_CASE("encoding is a pure function of plan, envs and layout (never the schema)") {
    const FeatureLayout layout = fit_layout(generate_repo(3));
    const PlanEncoder encoder(layout);
    PlanNode join;
    join.kind = OperatorKind::HashJoin;
    join.join_form = JoinForm::Inner;
    join.join_columns = {"t0.c1", "t1.c2"};
    PlanNode s0, s1;
    s0.kind = s1.kind = OperatorKind::TableScan;
    s0.table_id = "t0";
    s1.table_id = "t1";
    s0.n_partitions = s1.n_partitions = 8;
    s0.n_columns = s1.n_columns = 3;
    join.children = {s0, s1};
    const QueryPlan staged = decompose_stages(canonicalize(join));

    const PlanFeatureTensor before = encoder.encode_plan(staged, nullptr);
    // Regenerate a different world entirely; the encoder has no path to it.
    SyntheticWarehouse other(tiny_spec(999));
    (void)other.generate_project();
    const PlanFeatureTensor after = encoder.encode_plan(staged, nullptr);
    CHECK(before.node_features == after.node_features);
}

TEST_CASE("commuting join children changes topology only, not the row multiset") {
    const PlanEncoder encoder(fit_layout(generate_repo(3)));
    PlanNode join;
    join.kind = OperatorKind::HashJoin;
    join.join_form = JoinForm::Inner;
    join.join_columns = {"t0.c1", "t1.c2"};
    PlanNode s0, s1;
    s0.kind = s1.kind = OperatorKind::TableScan;
    s0.table_id = "t0";
    s1.table_id = "t1";
    s0.n_partitions = 8;
    s1.n_partitions = 16;
    s0.n_columns = 3;
    s1.n_columns = 5;
    join.children = {s0, s1};
    PlanNode swapped = join;
    std::swap(swapped.children[0], swapped.children[1]);

    const PlanFeatureTensor a =
        encoder.encode_plan(decompose_stages(canonicalize(join)), nullptr);
    const PlanFeatureTensor b =
        encoder.encode_plan(decompose_stages(canonicalize(swapped)), nullptr);

    auto row_multiset = [](const PlanFeatureTensor& t) {
        std::multiset<std::string> rows;
        for (Eigen::Index i = 0; i < t.n_nodes(); ++i) {
            std::ostringstream key;
            for (Eigen::Index j = 0; j < t.node_features.cols(); ++j) {
                key << t.node_features(i, j) << ',';
            }
            rows.insert(key.str());
        }
        return rows;
    };
    CHECK(row_multiset(a) == row_multiset(b));
}

TEST_CASE("layout persists to a sidecar and refuses a version mismatch") {
    const FeatureLayout layout = fit_layout(generate_repo(3));
    const std::string path = "/tmp/loam_layout_test.json";
    layout.save(path);
    const FeatureLayout back = FeatureLayout::load(path);
    CHECK(back.content_hash() == layout.content_hash());
    CHECK(back.feature_dim == layout.feature_dim);

    std::string text = layout.to_json_string();
    const auto pos = text.find("\"layout_version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"layout_version\":1").size(), "\"layout_version\":99");
    CHECK_THROWS_AS(FeatureLayout::from_json_string(text), DataError);
}

TEST_CASE("out-of-range numerics clamp and are counted") {
    const HistoricalRepository repo = generate_repo(3);
    const FeatureLayout layout = fit_layout(repo);
    const PlanEncoder encoder(layout);
    PlanNode scan;
    scan.kind = OperatorKind::TableScan;
    scan.table_id = "t0";
    scan.n_partitions = 1 << 30;  // far above any fitted maximum
    scan.n_columns = 3;
    const std::uint64_t before = encoder.clamp_count();
    const Eigen::VectorXd row = encoder.encode_node(scan, std::nullopt);
    const int w = layout.hash_segments * layout.hash_segment_width;
    CHECK(row[layout.scan.offset + w] == 1.0);
    CHECK(encoder.clamp_count() > before);
    CHECK(row.minCoeff() >= 0.0);
    CHECK(row.maxCoeff() <= 1.0);
}
