#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace loam {

// Physical operator tags. The warehouse planner emits a subset; the encoder
// reserves a one-hot slot for each.
enum class OperatorKind : std::uint8_t {
    TableScan,
    Filter,
    Calc,
    HashJoin,
    MergeJoin,
    NestedLoopJoin,
    HashAggregate,
    SortAggregate,
    Sort,
    Exchange,
    Project,
    Sink,
    Spool,
};

inline constexpr std::size_t kNumOperatorKinds = 13;

inline constexpr std::array<std::string_view, kNumOperatorKinds> kOperatorKindNames = {
    "TableScan",     "Filter",        "Calc",          "HashJoin", "MergeJoin",
    "NestedLoopJoin", "HashAggregate", "SortAggregate", "Sort",     "Exchange",
    "Project",       "Sink",          "Spool",
};

inline std::string_view to_string(OperatorKind k) {
    return kOperatorKindNames[static_cast<std::size_t>(k)];
}

OperatorKind operator_kind_from_string(std::string_view name);

inline bool is_join(OperatorKind k) {
    return k == OperatorKind::HashJoin || k == OperatorKind::MergeJoin ||
           k == OperatorKind::NestedLoopJoin;
}

inline bool is_aggregate(OperatorKind k) {
    return k == OperatorKind::HashAggregate || k == OperatorKind::SortAggregate;
}

enum class JoinForm : std::uint8_t { Inner, Left, Right, Full };
inline constexpr std::size_t kNumJoinForms = 4;
inline constexpr std::array<std::string_view, kNumJoinForms> kJoinFormNames = {"inner", "left",
                                                                               "right", "full"};

// Fixed aggregate-function catalog; anything else maps to Other.
enum class AggFunction : std::uint8_t { Sum, Count, Avg, Min, Max, Other };
inline constexpr std::size_t kNumAggFunctions = 6;
inline constexpr std::array<std::string_view, kNumAggFunctions> kAggFunctionNames = {
    "SUM", "COUNT", "AVG", "MIN", "MAX", "OTHER"};

// Fixed filter-function catalog; anything else maps to Other.
enum class FilterFunction : std::uint8_t { Gt, Lt, Eq, Ge, Le, Ne, Like, In, Other };
inline constexpr std::size_t kNumFilterFunctions = 9;
inline constexpr std::array<std::string_view, kNumFilterFunctions> kFilterFunctionNames = {
    ">", "<", "=", ">=", "<=", "!=", "LIKE", "IN", "OTHER"};

}  // namespace loam
