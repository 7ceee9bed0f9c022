#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "mmot/conditions.hpp"
#include "mmot/diagnostics.hpp"
#include "mmot/duality.hpp"
#include "mmot/solver.hpp"

namespace mmot {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Marginals: {"dim": d, "lower": [...], "upper": [...],
//             "points": [[...], ...], "weights": [...]}
Json marginal_to_json(const DiscreteMarginal& mu);
DiscreteMarginal marginal_from_json(const Json& j);

// Cost specs: {"family": ..., "m": ..., "dims": [...], "params": {...}},
// matrices as row-major nested arrays.
std::shared_ptr<const CostModel> cost_from_json(const Json& j);

// Couplings serialize to a list of {"index": [...], "mass": w}.
Json coupling_to_json(const Coupling& coupling);
Coupling coupling_from_json(const Json& j, const Instance& inst);

// Potentials serialize to an array of per-marginal arrays.
Json potentials_to_json(const Potentials& pot);
Potentials potentials_from_json(const Json& j);

Json condition_report_to_json(const ConditionReport& report);
Json slackness_report_to_json(const SlacknessReport& report);
Json graph_verdict_to_json(const GraphVerdict& verdict);
Json pushforward_report_to_json(const PushforwardReport& report);
Json uniqueness_verdict_to_json(const UniquenessVerdict& verdict);
Json dual_uniqueness_report_to_json(const DualUniquenessReport& report);

// Instance files reference marginal and cost JSON by path (relative paths
// resolve against the instance file's directory):
// {"marginals": [...paths...], "cost": path, "cap": optional}
Instance load_instance(const std::filesystem::path& path);

// CSV of extracted maps, one row of support indices per first-marginal atom.
void write_maps_csv(const std::filesystem::path& path, const GraphVerdict& verdict);

}  // namespace mmot
