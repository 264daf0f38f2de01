#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "loam/plan/repository.hpp"

namespace loam {

// On-disk repository format: one JSON object per line, each
// {"v": <schema version>, "record": {...}}. This file is the historical
// query repository.
inline constexpr int kRepositorySchemaVersion = 1;

nlohmann::json plan_to_json(const PlanNode& plan);
PlanNode plan_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const ExecutionRecord& rec);
ExecutionRecord record_from_json(const nlohmann::json& j);

// Canonical single-line serialization (keys sorted); used both for the log
// and as a structural identity key for plan dedup.
std::string plan_key(const PlanNode& plan);

void write_repository(const HistoricalRepository& repo, std::ostream& out);
void write_repository_file(const HistoricalRepository& repo, const std::string& path);
HistoricalRepository read_repository(std::istream& in, std::string schema_ref = {});
HistoricalRepository read_repository_file(const std::string& path);

}  // namespace loam
