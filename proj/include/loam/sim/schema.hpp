#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loam/plan/operator_kind.hpp"
#include "loam/util/rng.hpp"

namespace loam {

// Scalar distribution spec for project-generation knobs; loadable from
// config as {"kind": ..., "a": ..., "b": ...}.
struct DistSpec {
    enum class Kind { Constant, UniformInt, LogUniform, Uniform };
    Kind kind = Kind::Constant;
    double a = 0.0;
    double b = 0.0;

    double sample(Rng& rng) const;
    std::int64_t sample_int(Rng& rng) const;

    static DistSpec constant(double v) { return {Kind::Constant, v, v}; }
    static DistSpec uniform_int(std::int64_t lo, std::int64_t hi) {
        return {Kind::UniformInt, static_cast<double>(lo), static_cast<double>(hi)};
    }
    static DistSpec log_uniform(double lo, double hi) { return {Kind::LogUniform, lo, hi}; }
    static DistSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

struct TableInfo {
    std::string table_id;
    std::int64_t n_rows = 0;
    std::int64_t n_columns = 0;
    std::int64_t n_partitions = 0;
    std::int64_t lifespan_days = 0;

    // Column 0 is the partitioning column; filters on it prune partitions.
    std::string column_name(std::int64_t idx) const {
        return table_id + ".c" + std::to_string(idx);
    }
    std::string partition_column() const { return column_name(0); }
};

struct Schema {
    std::string schema_ref;
    std::vector<TableInfo> tables;

    const TableInfo& table(const std::string& id) const;
    bool has_table(const std::string& id) const;
};

// A parameterized join template: a chain of joins over 2-6 tables with one
// varying filter constant per run, optionally capped by a grouping
// aggregate. The per-constant selectivities form the seeded signal the
// predictor is supposed to pick up through partition pruning.
struct QueryTemplate {
    std::string template_id;
    std::vector<std::string> table_ids;  // join chain order as written
    struct JoinEdge {
        std::string left_column;   // column of table_ids[i]
        std::string right_column;  // column of table_ids[i+1]
    };
    std::vector<JoinEdge> joins;  // size = table_ids.size() - 1

    struct Filter {
        std::size_t table_index = 0;
        std::string column;               // the partition column of that table
        std::vector<double> selectivity;  // selectivity per constant index
        std::vector<FilterFunction> functions;
    };
    Filter filter;

    bool has_aggregate = false;
    std::string groupby_column;
    std::string agg_column;
    AggFunction agg_function = AggFunction::Sum;

    std::size_t n_constants() const { return filter.selectivity.size(); }
};

}  // namespace loam
