#include "bethelab/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bethelab {

namespace {

void check_schema(const json& j, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kJsonSchemaVersion)
    throw std::invalid_argument(std::string(what) + ": unsupported schema_version");
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json partition_json(const Partition& V) {
  json a = json::array();
  for (const auto& c : V) a.push_back(c);
  return a;
}

}  // namespace

json to_json(const DenseMeasure& mu) {
  return {{"schema_version", kJsonSchemaVersion},
          {"alphabet", mu.alphabet().symbols},
          {"n", mu.n()},
          {"mass", mu.masses()}};
}

DenseMeasure measure_from_json(const json& j) {
  check_schema(j, "measure");
  return DenseMeasure(Alphabet(j.at("alphabet").get<std::vector<std::string>>()), j.at("n").get<int>(),
                      j.at("mass").get<std::vector<double>>());
}

json to_json(const ModelSpec& s) {
  json vars = json::array(), facs = json::array(), weights = json::array();
  for (std::size_t x = 0; x < s.variables.size(); ++x)
    vars.push_back({{"id", x}, {"degree", s.variables[x].size()}, {"clone_types", s.variables[x]}});
  for (std::size_t a = 0; a < s.factors.size(); ++a)
    facs.push_back({{"id", a},
                    {"weight_fn_id", s.weights[static_cast<std::size_t>(s.factors[a].weight)]->id()},
                    {"clone_types", s.factors[a].clone_types}});
  for (const auto& w : s.weights) weights.push_back({{"id", w->id()}, {"arity", w->arity()}, {"table", w->table()}});
  return {{"schema_version", kJsonSchemaVersion}, {"family", s.family},    {"alphabet", s.alphabet.symbols},
          {"max_degree", s.max_degree},           {"variables", vars},     {"factors", facs},
          {"weights", weights}};
}

ModelSpec model_spec_from_json(const json& j) {
  check_schema(j, "model");
  ModelSpec s;
  s.family = j.value("family", std::string("custom"));
  s.alphabet = Alphabet(j.at("alphabet").get<std::vector<std::string>>());
  s.max_degree = j.value("max_degree", kDefaultMaxDegree);
  std::map<std::string, int> wid;
  for (const auto& w : j.at("weights")) {
    const std::string id = w.at("id").get<std::string>();
    if (wid.count(id)) throw std::invalid_argument("model: duplicate weight id " + id);
    wid[id] = static_cast<int>(s.weights.size());
    s.weights.push_back(std::make_shared<WeightFunction>(id, s.alphabet.size(), w.at("arity").get<int>(),
                                                         w.at("table").get<std::vector<double>>()));
  }
  for (const auto& v : j.at("variables")) {
    auto types = v.at("clone_types").get<std::vector<int>>();
    if (v.contains("degree") && v.at("degree").get<std::size_t>() != types.size())
      throw std::invalid_argument("model: variable degree disagrees with its clone types");
    s.variables.push_back(std::move(types));
  }
  for (const auto& f : j.at("factors")) {
    const std::string id = f.at("weight_fn_id").get<std::string>();
    auto it = wid.find(id);
    if (it == wid.end()) throw std::invalid_argument("model: unknown weight id " + id);
    s.factors.push_back(FactorRow{it->second, f.at("clone_types").get<std::vector<int>>()});
  }
  return s;
}

json to_json(const FactorGraph& g) {
  json pairs = json::array();
  for (std::size_t c = 0; c < g.matching().size(); ++c) pairs.push_back({c, g.matching()[c]});
  return {{"schema_version", kJsonSchemaVersion}, {"clone_pairs", pairs}};
}

FactorGraph graph_from_json(ModelPtr model, const json& j) {
  check_schema(j, "graph");
  std::vector<int> partner(static_cast<std::size_t>(model->num_clones()), -1);
  for (const auto& p : j.at("clone_pairs")) {
    const int c = p.at(0).get<int>(), f = p.at(1).get<int>();
    if (c < 0 || c >= model->num_clones()) throw std::invalid_argument("graph: clone index out of range");
    if (partner[static_cast<std::size_t>(c)] != -1) throw std::invalid_argument("graph: clone listed twice");
    partner[static_cast<std::size_t>(c)] = f;
  }
  return FactorGraph(std::move(model), std::move(partner));
}

json to_json(const LocalDistribution& d) {
  json entries = json::object();
  for (const auto& [k, e] : d.entries) entries[k] = e.weight;
  return {{"schema_version", kJsonSchemaVersion}, {"key_version", kKeyVersion}, {"depth", d.depth},
          {"mode", d.mode}, {"samples", d.samples}, {"seed", d.seed}, {"entries", entries}};
}

json to_json(const MarginalAssignment& p) {
  json v = json::object(), f = json::object(), slots = json::object();
  for (const auto& [k, d] : p.variables) v[k] = d;
  for (const auto& [k, d] : p.factors) f[k] = d;
  for (const auto& [k, s] : p.factor_slots) slots[k] = s;
  return {{"schema_version", kJsonSchemaVersion},
          {"key_version", kKeyVersion},
          {"depth", p.depth},
          {"q", p.q},
          {"provenance", {{"extension", p.extension}, {"fixed_point", p.fixed_point}, {"fixed_point_gap", p.fixed_point_gap}}},
          {"variables", v},
          {"factors", f},
          {"factor_slots", slots}};
}

MarginalAssignment marginal_assignment_from_json(const json& j) {
  check_schema(j, "marginal assignment");
  if (j.value("key_version", std::string(kKeyVersion)) != kKeyVersion)
    throw std::invalid_argument("marginal assignment: keys use a different serialisation version");
  MarginalAssignment p;
  p.depth = j.at("depth").get<int>();
  p.q = j.at("q").get<int>();
  const auto& pv = j.at("provenance");
  p.extension = pv.at("extension").get<int>();
  p.fixed_point = pv.at("fixed_point").get<bool>();
  p.fixed_point_gap = pv.at("fixed_point_gap").get<double>();
  for (const auto& [k, d] : j.at("variables").items()) p.variables[k] = d.get<Dist>();
  for (const auto& [k, d] : j.at("factors").items()) p.factors[k] = d.get<Dist>();
  for (const auto& [k, s] : j.at("factor_slots").items()) p.factor_slots[k] = s.get<std::vector<std::string>>();
  return p;
}

json to_json(const Decomposition& d) {
  json states = json::array();
  for (std::size_t i = 0; i < d.states.size(); ++i) {
    std::vector<std::size_t> members;
    for (std::size_t s = 0; s < d.states[i].members.size(); ++s)
      if (d.states[i].members[s]) members.push_back(s);
    states.push_back({{"index", i}, {"mass", d.states[i].mass}, {"cell", d.states[i].cell}, {"members", members}});
  }
  json splits = json::array();
  for (const auto& s : d.splits)
    splits.push_back({{"iteration", s.iteration}, {"target", s.target}, {"index_before", s.index_before},
                      {"index_after", s.index_after}, {"bound", s.bound}, {"premise_held", s.premise_held}});
  const auto& r = d.report;
  return {{"schema_version", kJsonSchemaVersion},
          {"eps", d.eps},
          {"partition", partition_json(d.V)},
          {"states", states},
          {"good_states", d.I},
          {"iterations", d.iterations},
          {"iteration_bound", d.iteration_bound},
          {"splits", splits},
          {"report",
           {{"hm1", r.hm1}, {"hm2", r.hm2}, {"hm3", r.hm3}, {"hm4", r.hm4}, {"ok", r.ok()},
            {"excluded_mass", r.excluded_mass}, {"max_state_diameter", r.max_state_diameter},
            {"states", r.states}, {"states_in_I", r.states_in_I}, {"failures", r.failures}}}};
}

json to_json(const MomentEstimate& e) {
  return {{"schema_version", kJsonSchemaVersion},
          {"mode", e.mode},
          {"value", finite_or_null(e.value)},
          {"band", e.band},
          {"samples", e.samples},
          {"seed", e.seed},
          {"acceptance_rate", e.acceptance_rate},
          {"filtered", e.filtered},
          {"class_value", finite_or_null(e.class_value)},
          {"filtered_value", finite_or_null(e.filtered_value)},
          {"acyclic_rate", e.acyclic_rate},
          {"in_class", e.in_class}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace bethelab
