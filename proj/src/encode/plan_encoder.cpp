#include "loam/encode/plan_encoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "loam/util/errors.hpp"
#include "loam/util/hashing.hpp"

namespace loam {

using nlohmann::json;

namespace {

FeatureSpan next_span(int& cursor, int size) {
    FeatureSpan s{cursor, size};
    cursor += size;
    return s;
}

void compute_spans(FeatureLayout& layout) {
    const int w = layout.hash_segments * layout.hash_segment_width;
    int cursor = 0;
    layout.operator_onehot = next_span(cursor, static_cast<int>(kNumOperatorKinds));
    layout.scan = next_span(cursor, w + 2);
    layout.join = next_span(cursor, static_cast<int>(kNumJoinForms) + w);
    layout.aggregate = next_span(cursor, static_cast<int>(kNumAggFunctions) + 2 * w);
    layout.filter = next_span(cursor, static_cast<int>(kNumFilterFunctions) + w);
    layout.environment = next_span(cursor, 4);
    layout.feature_dim = cursor;
}

}  // namespace

std::uint64_t FeatureLayout::content_hash() const { return hash64(to_json_string(), 0x10a41); }

std::string FeatureLayout::to_json_string() const {
    json j;
    j["layout_version"] = layout_version;
    j["hash_segments"] = hash_segments;
    j["hash_segment_width"] = hash_segment_width;
    j["hash_master_seed"] = hash_master_seed;
    j["log_partitions"] = {log_partitions_lo, log_partitions_hi};
    j["log_columns"] = {log_columns_lo, log_columns_hi};
    j["log_load5"] = {log_load5_lo, log_load5_hi};
    return j.dump();
}

FeatureLayout FeatureLayout::from_json_string(const std::string& text) {
    json j = json::parse(text);
    FeatureLayout l;
    const int version = j.at("layout_version").get<int>();
    if (version != l.layout_version) {
        throw DataError("FeatureLayout: version mismatch (file has " + std::to_string(version) +
                        ", code expects " + std::to_string(l.layout_version) + ")");
    }
    l.hash_segments = j.at("hash_segments").get<int>();
    l.hash_segment_width = j.at("hash_segment_width").get<int>();
    l.hash_master_seed = j.at("hash_master_seed").get<std::uint64_t>();
    l.log_partitions_lo = j.at("log_partitions")[0].get<double>();
    l.log_partitions_hi = j.at("log_partitions")[1].get<double>();
    l.log_columns_lo = j.at("log_columns")[0].get<double>();
    l.log_columns_hi = j.at("log_columns")[1].get<double>();
    l.log_load5_lo = j.at("log_load5")[0].get<double>();
    l.log_load5_hi = j.at("log_load5")[1].get<double>();
    compute_spans(l);
    return l;
}

void FeatureLayout::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("FeatureLayout: cannot write " + path);
    out << to_json_string() << '\n';
}

FeatureLayout FeatureLayout::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("FeatureLayout: cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

FeatureLayout fit_layout(const HistoricalRepository& repo, int hash_segments,
                         int hash_segment_width, std::uint64_t hash_master_seed) {
    FeatureLayout layout;
    layout.hash_segments = hash_segments;
    layout.hash_segment_width = hash_segment_width;
    layout.hash_master_seed = hash_master_seed;

    double p_lo = std::numeric_limits<double>::infinity(), p_hi = -p_lo;
    double c_lo = p_lo, c_hi = -p_lo;
    double l_lo = p_lo, l_hi = -p_lo;
    for (const auto& rec : repo.records()) {
        for_each_node(rec.plan, [&](const PlanNode& node) {
            if (node.n_partitions) {
                const double v = std::log(static_cast<double>(*node.n_partitions));
                p_lo = std::min(p_lo, v);
                p_hi = std::max(p_hi, v);
            }
            if (node.n_columns) {
                const double v = std::log(static_cast<double>(*node.n_columns));
                c_lo = std::min(c_lo, v);
                c_hi = std::max(c_hi, v);
            }
        });
        for (const auto& [stage, env] : rec.stage_envs) {
            const double v = std::log(env.load5);
            l_lo = std::min(l_lo, v);
            l_hi = std::max(l_hi, v);
        }
    }
    if (!std::isfinite(p_lo)) p_lo = p_hi = 0.0;
    if (!std::isfinite(c_lo)) c_lo = c_hi = 0.0;
    if (!std::isfinite(l_lo)) l_lo = l_hi = 0.0;
    layout.log_partitions_lo = p_lo;
    layout.log_partitions_hi = p_hi;
    layout.log_columns_lo = c_lo;
    layout.log_columns_hi = c_hi;
    layout.log_load5_lo = l_lo;
    layout.log_load5_hi = l_hi;
    compute_spans(layout);
    return layout;
}

PlanEncoder::PlanEncoder(FeatureLayout layout)
    : layout_(std::move(layout)),
      hasher_(HashEncoder::from_master_seed(layout_.hash_segments, layout_.hash_segment_width,
                                            layout_.hash_master_seed)) {
    if (layout_.feature_dim == 0) {
        compute_spans(layout_);
    }
}

double PlanEncoder::norm_log(double value, double lo, double hi) const {
    const double v = std::log(value);
    if (hi <= lo) {
        if (v != lo) ++clamp_count_;
        return 0.0;
    }
    const double z = (v - lo) / (hi - lo);
    if (z < 0.0 || z > 1.0) {
        ++clamp_count_;
        return std::clamp(z, 0.0, 1.0);
    }
    return z;
}

double PlanEncoder::normalize_load5(double load5) const {
    return norm_log(load5, layout_.log_load5_lo, layout_.log_load5_hi);
}

void PlanEncoder::fill_row(const PlanNode& node, const double* env_block,
                           Eigen::Ref<Eigen::VectorXd> row) const {
    row.setZero();
    row[layout_.operator_onehot.offset + static_cast<int>(node.kind)] = 1.0;

    const int w = hasher_.width();
    if (node.kind == OperatorKind::TableScan) {
        const std::string ids[1] = {*node.table_id};
        hasher_.encode_into(std::span<const std::string>(ids, 1),
                            row.segment(layout_.scan.offset, w));
        row[layout_.scan.offset + w] =
            norm_log(static_cast<double>(*node.n_partitions), layout_.log_partitions_lo,
                     layout_.log_partitions_hi);
        row[layout_.scan.offset + w + 1] = norm_log(
            static_cast<double>(*node.n_columns), layout_.log_columns_lo, layout_.log_columns_hi);
    }
    if (is_join(node.kind)) {
        if (node.join_form) {
            row[layout_.join.offset + static_cast<int>(*node.join_form)] = 1.0;
        }
        hasher_.encode_into(node.join_columns,
                            row.segment(layout_.join.offset + static_cast<int>(kNumJoinForms), w));
    }
    if (is_aggregate(node.kind)) {
        for (const auto f : node.agg_functions) {
            row[layout_.aggregate.offset + static_cast<int>(f)] = 1.0;
        }
        const int base = layout_.aggregate.offset + static_cast<int>(kNumAggFunctions);
        hasher_.encode_into(node.agg_columns, row.segment(base, w));
        hasher_.encode_into(node.groupby_columns, row.segment(base + w, w));
    }
    if (node.kind == OperatorKind::Filter || node.kind == OperatorKind::Calc) {
        for (const auto f : node.filter_functions) {
            row[layout_.filter.offset + static_cast<int>(f)] = 1.0;
        }
        hasher_.encode_into(
            node.filter_columns,
            row.segment(layout_.filter.offset + static_cast<int>(kNumFilterFunctions), w));
    }
    for (int i = 0; i < 4; ++i) row[layout_.environment.offset + i] = env_block[i];
}

Eigen::VectorXd PlanEncoder::encode_node(const PlanNode& node,
                                         const std::optional<EnvironmentVector>& env) const {
    Eigen::VectorXd row(layout_.feature_dim);
    double block[4];
    if (env) {
        block[0] = env->cpu_idle;
        block[1] = env->io_wait;
        block[2] = normalize_load5(env->load5);
        block[3] = env->mem_usage;
    } else {
        std::copy(std::begin(kEnvSentinel), std::end(kEnvSentinel), block);
    }
    fill_row(node, block, row);
    return row;
}

namespace {

// Pre-order flattening with child indices.
void flatten(const PlanNode& node, std::vector<const PlanNode*>& nodes,
             std::vector<std::array<int, 2>>& children) {
    if (node.children.size() > 2) {
        throw PreconditionError("encode_plan: node arity > 2, canonicalize first");
    }
    const int my_index = static_cast<int>(nodes.size());
    nodes.push_back(&node);
    children.push_back({-1, -1});
    for (std::size_t c = 0; c < node.children.size(); ++c) {
        const int child_index = static_cast<int>(nodes.size());
        children[static_cast<std::size_t>(my_index)][c] = child_index;
        flatten(node.children[c], nodes, children);
    }
}

}  // namespace

PlanFeatureTensor PlanEncoder::encode_plan(const QueryPlan& plan,
                                           const std::map<int, EnvironmentVector>* record_envs) const {
    std::vector<const PlanNode*> nodes;
    std::vector<std::array<int, 2>> children;
    flatten(plan, nodes, children);

    PlanFeatureTensor t;
    t.layout_hash = layout_.content_hash();
    t.node_features.resize(static_cast<Eigen::Index>(nodes.size()), layout_.feature_dim);
    t.topology.resize(static_cast<Eigen::Index>(nodes.size()), 2);
    t.stage_of_node.resize(nodes.size());

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const PlanNode& node = *nodes[i];
        double block[4];
        if (record_envs) {
            const auto it = record_envs->find(node.stage_id);
            if (it == record_envs->end()) {
                throw DataError("encode_plan: no environment for stage " +
                                std::to_string(node.stage_id));
            }
            block[0] = it->second.cpu_idle;
            block[1] = it->second.io_wait;
            block[2] = normalize_load5(it->second.load5);
            block[3] = it->second.mem_usage;
        } else {
            std::copy(std::begin(kEnvSentinel), std::end(kEnvSentinel), block);
        }
        Eigen::VectorXd row(layout_.feature_dim);
        fill_row(node, block, row);
        t.node_features.row(static_cast<Eigen::Index>(i)) = row;
        t.topology(static_cast<Eigen::Index>(i), 0) = children[i][0];
        t.topology(static_cast<Eigen::Index>(i), 1) = children[i][1];
        t.stage_of_node[i] = node.stage_id;
    }
    return t;
}

PlanFeatureTensor PlanEncoder::encode_plan_fixed_env(const QueryPlan& plan,
                                                     const Eigen::Vector4d& normalized_env) const {
    PlanFeatureTensor t = encode_plan(plan, nullptr);
    for (Eigen::Index i = 0; i < t.n_nodes(); ++i) {
        for (int k = 0; k < 4; ++k) {
            t.node_features(i, layout_.environment.offset + k) = normalized_env[k];
        }
    }
    return t;
}

}  // namespace loam
