#include "loam/sim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "loam/util/errors.hpp"

namespace loam {

namespace {

struct JoinUnit {
    PlanNode plan;
    double est_rows = 0.0;
    std::size_t leaf_inputs = 1;
};

PlanNode sort_wrap(PlanNode child) {
    PlanNode s;
    s.kind = OperatorKind::Sort;
    s.children.push_back(std::move(child));
    return s;
}

}  // namespace

QueryPlan RuleBasedPlanner::build_plan(const QueryTemplate& tmpl, int param_index,
                                       const PlannerKnobs& knobs) const {
    const Schema& schema = oracle_.schema();
    const std::size_t k = tmpl.table_ids.size();
    if (k == 0) throw ConfigError("build_plan: template has no tables");
    if (param_index < 0 || static_cast<std::size_t>(param_index) >= tmpl.n_constants()) {
        throw ArgumentError("build_plan: filter constant index out of range");
    }
    const double sel = tmpl.filter.selectivity[static_cast<std::size_t>(param_index)];

    // Column sets per position; duplicate tables share the union so their
    // scan subtrees stay structurally identical (spool dedup relies on it).
    std::vector<std::set<std::string>> cols_by_position(k);
    for (std::size_t i = 0; i < tmpl.joins.size(); ++i) {
        cols_by_position[i].insert(tmpl.joins[i].left_column);
        cols_by_position[i + 1].insert(tmpl.joins[i].right_column);
    }
    cols_by_position[tmpl.filter.table_index].insert(tmpl.filter.column);
    if (tmpl.has_aggregate && k > 0) {
        cols_by_position[k - 1].insert(tmpl.groupby_column);
        cols_by_position[k - 1].insert(tmpl.agg_column);
    }
    std::map<std::string, std::set<std::string>> cols_by_table;
    std::map<std::string, int> table_multiplicity;
    for (std::size_t p = 0; p < k; ++p) {
        auto& s = cols_by_table[tmpl.table_ids[p]];
        s.insert(cols_by_position[p].begin(), cols_by_position[p].end());
        table_multiplicity[tmpl.table_ids[p]]++;
    }

    const bool spool_on = knobs.spool_shared_subtrees ? !rules_.spool_duplicates
                                                      : rules_.spool_duplicates;

    std::vector<JoinUnit> units(k);
    for (std::size_t p = 0; p < k; ++p) {
        const TableInfo& t = schema.table(tmpl.table_ids[p]);
        PlanNode scan;
        scan.kind = OperatorKind::TableScan;
        scan.table_id = t.table_id;
        scan.n_columns = std::min<std::int64_t>(
            t.n_columns, static_cast<std::int64_t>(cols_by_table[t.table_id].size()) + 1);
        if (p == tmpl.filter.table_index) {
            // Partition pruning from the filter constant (metadata-driven).
            scan.n_partitions = std::max<std::int64_t>(
                1,
                static_cast<std::int64_t>(std::ceil(static_cast<double>(t.n_partitions) * sel)));
        } else {
            scan.n_partitions = t.n_partitions;
        }

        PlanNode top = std::move(scan);
        if (p == tmpl.filter.table_index && !knobs.hold_filters_above_joins) {
            PlanNode filter;
            filter.kind = OperatorKind::Filter;
            filter.filter_columns = {tmpl.filter.column};
            filter.filter_functions = tmpl.filter.functions;
            filter.children.push_back(std::move(top));
            top = std::move(filter);
        }
        if (spool_on && table_multiplicity[tmpl.table_ids[p]] > 1) {
            PlanNode spool;
            spool.kind = OperatorKind::Spool;
            spool.children.push_back(std::move(top));
            top = std::move(spool);
        }
        units[p].plan = std::move(top);
        units[p].est_rows = oracle_.planner_output_rows(units[p].plan);
    }

    const auto& stats = oracle_.stats();
    auto join_units = [&](JoinUnit left, JoinUnit right, const QueryTemplate::JoinEdge& edge,
                          bool left_holds_edge_left) {
        const double fanout = stats.planner_fanout(edge.left_column, edge.right_column);
        const double est_out = std::max(left.est_rows, right.est_rows) * fanout;

        PlanNode join;
        // Rule: merge join pays off below the size threshold (pre-sorted
        // short inputs), hash join above; the knob inverts the decision.
        const bool rule_merge =
            std::max(left.est_rows, right.est_rows) < rules_.merge_join_row_threshold;
        const bool merge = knobs.prefer_merge_join ? !rule_merge : rule_merge;
        join.kind = merge ? OperatorKind::MergeJoin : OperatorKind::HashJoin;
        join.join_form = JoinForm::Inner;
        const std::string& lcol = left_holds_edge_left ? edge.left_column : edge.right_column;
        const std::string& rcol = left_holds_edge_left ? edge.right_column : edge.left_column;

        // Build-side rule: the smaller estimated input goes left.
        bool put_left_first = left.est_rows <= right.est_rows;
        if (knobs.swap_join_inputs) put_left_first = !put_left_first;

        PlanNode first = std::move(left.plan);
        PlanNode second = std::move(right.plan);
        std::string first_col = lcol, second_col = rcol;
        if (!put_left_first) {
            std::swap(first, second);
            std::swap(first_col, second_col);
        }
        if (merge) {
            first = sort_wrap(std::move(first));
            second = sort_wrap(std::move(second));
        }
        join.join_columns = {first_col, second_col};
        join.children.push_back(std::move(first));
        join.children.push_back(std::move(second));

        JoinUnit merged;
        merged.plan = std::move(join);
        merged.leaf_inputs = left.leaf_inputs + right.leaf_inputs;
        merged.est_rows = merged.leaf_inputs >= 3 ? est_out * knobs.cardinality_scale : est_out;
        return merged;
    };

    JoinUnit current;
    if (k == 1) {
        current = std::move(units[0]);
    } else if (knobs.hold_template_join_order) {
        current = std::move(units[0]);
        for (std::size_t i = 0; i < tmpl.joins.size(); ++i) {
            current = join_units(std::move(current), std::move(units[i + 1]), tmpl.joins[i], true);
        }
    } else {
        // Greedy: start from the smallest estimated unit, repeatedly take the
        // chain edge with the cheapest estimated join output.
        std::size_t start = 0;
        for (std::size_t p = 1; p < k; ++p) {
            if (units[p].est_rows < units[start].est_rows) start = p;
        }
        current = std::move(units[start]);
        std::set<std::size_t> joined = {start};
        while (joined.size() < k) {
            std::size_t best_edge = tmpl.joins.size();
            std::size_t best_other = 0;
            bool best_left_holds = true;
            double best_est = 0.0;
            for (std::size_t e = 0; e < tmpl.joins.size(); ++e) {
                const bool l_in = joined.count(e) > 0;
                const bool r_in = joined.count(e + 1) > 0;
                if (l_in == r_in) continue;  // both joined or both pending
                const std::size_t other = l_in ? e + 1 : e;
                double est = std::max(current.est_rows, units[other].est_rows) *
                             stats.planner_fanout(tmpl.joins[e].left_column,
                                                  tmpl.joins[e].right_column);
                if (current.leaf_inputs + units[other].leaf_inputs >= 3) {
                    est *= knobs.cardinality_scale;
                }
                if (best_edge == tmpl.joins.size() || est < best_est) {
                    best_edge = e;
                    best_other = other;
                    best_left_holds = l_in;
                    best_est = est;
                }
            }
            if (best_edge == tmpl.joins.size()) {
                throw ConfigError("build_plan: join graph is not connected");
            }
            current = join_units(std::move(current), std::move(units[best_other]),
                                 tmpl.joins[best_edge], best_left_holds);
            joined.insert(best_other);
        }
    }

    PlanNode top = std::move(current.plan);
    const double top_est = current.est_rows;
    if (knobs.hold_filters_above_joins) {
        PlanNode calc;
        calc.kind = OperatorKind::Calc;
        calc.filter_columns = {tmpl.filter.column};
        calc.filter_functions = tmpl.filter.functions;
        calc.children.push_back(std::move(top));
        top = std::move(calc);
    }
    if (tmpl.has_aggregate) {
        // Rule: co-partition through an Exchange only when the aggregate
        // input looks large; the knob inverts the decision.
        const bool rule_exchange = top_est > rules_.exchange_row_threshold;
        const bool exchange = knobs.elide_exchange_before_agg ? !rule_exchange : rule_exchange;
        if (exchange) {
            PlanNode ex;
            ex.kind = OperatorKind::Exchange;
            ex.children.push_back(std::move(top));
            top = std::move(ex);
        }
        PlanNode agg;
        agg.kind = OperatorKind::HashAggregate;
        agg.groupby_columns = {tmpl.groupby_column};
        agg.agg_columns = {tmpl.agg_column};
        agg.agg_functions = {tmpl.agg_function};
        agg.children.push_back(std::move(top));
        top = std::move(agg);
    }
    PlanNode sink;
    sink.kind = OperatorKind::Sink;
    sink.children.push_back(std::move(top));

    return decompose_stages(canonicalize(sink));
}

}  // namespace loam
