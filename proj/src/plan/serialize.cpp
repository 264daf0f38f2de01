#include "loam/plan/serialize.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loam/util/errors.hpp"

namespace loam {

using nlohmann::json;

void ExecutionRecord::check() const {
    if (!(cpu_cost > 0.0)) throw DataError("ExecutionRecord: cpu_cost must be positive");
    for_each_node(plan, [&](const PlanNode& node) {
        if (node.stage_id < 0 || !stage_envs.count(node.stage_id)) {
            throw DataError("ExecutionRecord: stage_envs missing stage " +
                            std::to_string(node.stage_id));
        }
    });
}

void HistoricalRepository::append(ExecutionRecord record) {
    record.check();
    if (!records_.empty() && record.day < records_.back().day) {
        throw DataError("HistoricalRepository: records must be appended in day order");
    }
    records_.push_back(std::move(record));
}

json plan_to_json(const PlanNode& plan) {
    json j;
    j["kind"] = std::string(to_string(plan.kind));
    if (plan.table_id) j["table_id"] = *plan.table_id;
    if (plan.n_partitions) j["n_partitions"] = *plan.n_partitions;
    if (plan.n_columns) j["n_columns"] = *plan.n_columns;
    if (plan.join_form) {
        j["join_form"] = std::string(kJoinFormNames[static_cast<std::size_t>(*plan.join_form)]);
    }
    if (!plan.join_columns.empty()) j["join_columns"] = plan.join_columns;
    if (!plan.agg_columns.empty()) j["agg_columns"] = plan.agg_columns;
    if (!plan.groupby_columns.empty()) j["groupby_columns"] = plan.groupby_columns;
    if (!plan.filter_columns.empty()) j["filter_columns"] = plan.filter_columns;
    if (!plan.agg_functions.empty()) {
        auto arr = json::array();
        for (auto f : plan.agg_functions) {
            arr.push_back(std::string(kAggFunctionNames[static_cast<std::size_t>(f)]));
        }
        j["agg_functions"] = std::move(arr);
    }
    if (!plan.filter_functions.empty()) {
        auto arr = json::array();
        for (auto f : plan.filter_functions) {
            arr.push_back(std::string(kFilterFunctionNames[static_cast<std::size_t>(f)]));
        }
        j["filter_functions"] = std::move(arr);
    }
    if (plan.stage_id >= 0) j["stage_id"] = plan.stage_id;
    if (!plan.children.empty()) {
        auto arr = json::array();
        for (const auto& c : plan.children) arr.push_back(plan_to_json(c));
        j["children"] = std::move(arr);
    }
    return j;
}

namespace {

template <typename Enum, std::size_t N>
Enum enum_from_name(const std::array<std::string_view, N>& names, const std::string& s,
                    const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw DataError(std::string("unknown ") + what + ": " + s);
}

}  // namespace

PlanNode plan_from_json(const json& j) {
    PlanNode node;
    node.kind = operator_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("table_id")) node.table_id = j["table_id"].get<std::string>();
    if (j.contains("n_partitions")) node.n_partitions = j["n_partitions"].get<std::int64_t>();
    if (j.contains("n_columns")) node.n_columns = j["n_columns"].get<std::int64_t>();
    if (j.contains("join_form")) {
        node.join_form =
            enum_from_name<JoinForm>(kJoinFormNames, j["join_form"].get<std::string>(), "join form");
    }
    if (j.contains("join_columns")) node.join_columns = j["join_columns"].get<std::vector<std::string>>();
    if (j.contains("agg_columns")) node.agg_columns = j["agg_columns"].get<std::vector<std::string>>();
    if (j.contains("groupby_columns")) {
        node.groupby_columns = j["groupby_columns"].get<std::vector<std::string>>();
    }
    if (j.contains("filter_columns")) {
        node.filter_columns = j["filter_columns"].get<std::vector<std::string>>();
    }
    if (j.contains("agg_functions")) {
        for (const auto& f : j["agg_functions"]) {
            node.agg_functions.push_back(enum_from_name<AggFunction>(
                kAggFunctionNames, f.get<std::string>(), "aggregate function"));
        }
    }
    if (j.contains("filter_functions")) {
        for (const auto& f : j["filter_functions"]) {
            node.filter_functions.push_back(enum_from_name<FilterFunction>(
                kFilterFunctionNames, f.get<std::string>(), "filter function"));
        }
    }
    if (j.contains("stage_id")) node.stage_id = j["stage_id"].get<int>();
    if (j.contains("children")) {
        for (const auto& c : j["children"]) node.children.push_back(plan_from_json(c));
    }
    return node;
}

namespace {

json env_to_json(const EnvironmentVector& e) {
    return json{{"cpu_idle", e.cpu_idle},
                {"io_wait", e.io_wait},
                {"load5", e.load5},
                {"mem_usage", e.mem_usage}};
}

EnvironmentVector env_from_json(const json& j) {
    EnvironmentVector e;
    e.cpu_idle = j.at("cpu_idle").get<double>();
    e.io_wait = j.at("io_wait").get<double>();
    e.load5 = j.at("load5").get<double>();
    e.mem_usage = j.at("mem_usage").get<double>();
    return e;
}

}  // namespace

json record_to_json(const ExecutionRecord& rec) {
    json envs = json::object();
    for (const auto& [stage, env] : rec.stage_envs) envs[std::to_string(stage)] = env_to_json(env);
    json q;
    q["query_id"] = rec.query_id;
    q["plan"] = plan_to_json(rec.plan);
    q["plan_kind"] = to_string(rec.plan_kind);
    q["stage_envs"] = std::move(envs);
    q["cpu_cost"] = rec.cpu_cost;
    q["day"] = rec.day;
    return q;
}

ExecutionRecord record_from_json(const json& j) {
    ExecutionRecord rec;
    rec.query_id = j.at("query_id").get<std::string>();
    rec.plan = plan_from_json(j.at("plan"));
    rec.plan_kind = j.at("plan_kind").get<std::string>() == "default" ? PlanKind::Default
                                                                      : PlanKind::Candidate;
    for (const auto& [key, value] : j.at("stage_envs").items()) {
        rec.stage_envs[std::stoi(key)] = env_from_json(value);
    }
    rec.cpu_cost = j.at("cpu_cost").get<double>();
    rec.day = j.at("day").get<std::int64_t>();
    return rec;
}

std::string plan_key(const PlanNode& plan) { return plan_to_json(plan).dump(); }

void write_repository(const HistoricalRepository& repo, std::ostream& out) {
    for (const auto& rec : repo.records()) {
        json line;
        line["v"] = kRepositorySchemaVersion;
        line["record"] = record_to_json(rec);
        out << line.dump() << '\n';
    }
}

void write_repository_file(const HistoricalRepository& repo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open repository file for writing: " + path);
    write_repository(repo, out);
}

HistoricalRepository read_repository(std::istream& in, std::string schema_ref) {
    HistoricalRepository repo(std::move(schema_ref));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.at("v").get<int>() != kRepositorySchemaVersion) {
            throw DataError("repository line " + std::to_string(lineno) +
                            ": unsupported schema version");
        }
        repo.append(record_from_json(j.at("record")));
    }
    return repo;
}

HistoricalRepository read_repository_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open repository file: " + path);
    return read_repository(in);
}

}  // namespace loam
