#pragma once

#include <string>

#include <json.hpp>

#include "bethelab/bethe.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/local.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/model.hpp"
#include "bethelab/moments.hpp"
#include "bethelab/regularity.hpp"

namespace bethelab {

using json = nlohmann::json;

inline constexpr int kJsonSchemaVersion = 1;

json to_json(const DenseMeasure& mu);
DenseMeasure measure_from_json(const json& j);

json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);

// {"schema_version", "clone_pairs": [[variable clone, constraint clone], ...]}
json to_json(const FactorGraph& g);
FactorGraph graph_from_json(ModelPtr model, const json& j);

json to_json(const LocalDistribution& d);
json to_json(const MarginalAssignment& p);
MarginalAssignment marginal_assignment_from_json(const json& j);
json to_json(const Decomposition& d);
json to_json(const MomentEstimate& e);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace bethelab
