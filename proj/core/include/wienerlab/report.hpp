#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wienerlab/distance.hpp"

namespace wienerlab {

using Json = nlohmann::ordered_json;

enum class Verdict { pass, fail, vacuous };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// Result of one experiment. Rows hold named exact values, distance
/// estimates and bound values; `summary` holds run parameters, gate
/// thresholds and aggregates derived from the rows. The verdict can be
/// recomputed from rows + summary alone (see recompute_verdict).
struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<Json> rows;
    Json summary = Json::object();
    Verdict verdict = Verdict::fail;
    std::vector<std::string> notes;
    /// Wall-clock seconds. Not serialized: reports must be byte-identical
    /// across runs with the same config and seed.
    double wall_seconds = 0.0;
};

Json to_json(const DistanceEstimate& e);
DistanceEstimate distance_from_json(const Json& j);

/// {"experiment", "seed", "rows", "summary", "verdict", "notes"}.
Json to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const Json& j);

/// Flat CSV of the rows: nested objects become dotted columns
/// (tv.value, tv.ci.0, ...), arrays become indexed columns.
std::string rows_to_csv(const ExperimentReport& r);

/// Checks the published report schema; returns an empty string when valid,
/// otherwise a JSON-pointer-style location and message.
std::string validate_report_json(const Json& j);

}  // namespace wienerlab
