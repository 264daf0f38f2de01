#include "loam/select/plan_selection.hpp"

#include <nlohmann/json.hpp>

#include "loam/plan/serialize.hpp"
#include "loam/util/errors.hpp"

namespace loam {

EnvSource env_source_from_string(const std::string& s) {
    if (s == "historical_mean") return EnvSource::HistoricalMean;
    if (s == "fixed_default") return EnvSource::FixedDefault;
    if (s == "cluster_expectation") return EnvSource::ClusterExpectation;
    if (s == "cluster_instant") return EnvSource::ClusterInstant;
    throw ArgumentError("unknown representative-environment source: " + s);
}

const char* to_string(EnvSource s) {
    switch (s) {
        case EnvSource::HistoricalMean: return "historical_mean";
        case EnvSource::FixedDefault: return "fixed_default";
        case EnvSource::ClusterExpectation: return "cluster_expectation";
        case EnvSource::ClusterInstant: return "cluster_instant";
    }
    return "?";
}

namespace {

Eigen::Vector4d normalize(const EnvironmentVector& e, const PlanEncoder& encoder) {
    return {e.cpu_idle, e.io_wait, encoder.normalize_load5(e.load5), e.mem_usage};
}

}  // namespace

RepresentativeEnvironment build_representative_env(const HistoricalRepository& repo,
                                                   EnvSource source, const PlanEncoder& encoder,
                                                   SyntheticWarehouse* warehouse) {
    RepresentativeEnvironment rep;
    rep.source = source;
    switch (source) {
        case EnvSource::FixedDefault:
            rep.values = {0.5, 0.05, 0.5, 0.5};
            return rep;
        case EnvSource::HistoricalMean: {
            if (repo.empty()) {
                throw DataError("build_representative_env: historical_mean needs a non-empty repo");
            }
            Eigen::Vector4d sum = Eigen::Vector4d::Zero();
            std::size_t count = 0;
            for (const auto& rec : repo.records()) {
                for (const auto& [stage, env] : rec.stage_envs) {
                    sum += normalize(env, encoder);
                    ++count;
                }
            }
            rep.values = sum / static_cast<double>(count);
            return rep;
        }
        case EnvSource::ClusterExpectation: {
            if (!warehouse) {
                throw ArgumentError("build_representative_env: CE needs the cluster trace");
            }
            const auto window = warehouse->cluster_window(kClusterWindowTicks);
            Eigen::Vector4d sum = Eigen::Vector4d::Zero();
            for (const auto& e : window) sum += normalize(e, encoder);
            rep.values = sum / static_cast<double>(window.size());
            return rep;
        }
        case EnvSource::ClusterInstant: {
            if (!warehouse) {
                throw ArgumentError("build_representative_env: CB needs the cluster trace");
            }
            rep.values = normalize(warehouse->cluster_instant(), encoder);
            return rep;
        }
    }
    throw ArgumentError("build_representative_env: bad source");
}

SelectionResult select_plan(const TrainedModel& model, const PlanEncoder& encoder,
                            std::span<const QueryPlan> candidates,
                            const RepresentativeEnvironment& e_r) {
    if (candidates.empty()) throw ArgumentError("select_plan: empty candidate list");
    SelectionResult result;
    result.predicted_costs.reserve(candidates.size());
    for (const auto& plan : candidates) {
        const PlanFeatureTensor t = encoder.encode_plan_fixed_env(plan, e_r.values);
        result.predicted_costs.push_back(model.predict(t).cost);
    }
    result.chosen_index = 0;
    for (std::size_t i = 1; i < result.predicted_costs.size(); ++i) {
        if (result.predicted_costs[i] < result.predicted_costs[result.chosen_index]) {
            result.chosen_index = i;
        }
    }
    return result;
}

std::string decision_log_line(const std::string& query_id,
                              std::span<const QueryPlan> candidates,
                              const SelectionResult& result,
                              const RepresentativeEnvironment& e_r) {
    nlohmann::json j;
    j["query_id"] = query_id;
    j["n_candidates"] = candidates.size();
    j["predicted_costs"] = result.predicted_costs;
    j["chosen_index"] = result.chosen_index;
    j["e_r"] = {e_r.values[0], e_r.values[1], e_r.values[2], e_r.values[3]};
    j["e_r_source"] = to_string(e_r.source);
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& p : candidates) keys.push_back(plan_key(p));
    j["candidate_keys"] = std::move(keys);
    return j.dump();
}

}  // namespace loam
