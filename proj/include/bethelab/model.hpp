#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bethelab/measure.hpp"

namespace bethelab {

inline constexpr int kDefaultMaxDegree = 6;

// Strictly positive weight table over Omega^arity (lexicographic order).
class WeightFunction {
 public:
  WeightFunction(std::string id, int q, int arity, std::vector<double> table);

  const std::string& id() const { return id_; }
  int q() const { return q_; }
  int arity() const { return arity_; }
  const std::vector<double>& table() const { return table_; }
  double at(std::size_t idx) const { return table_[idx]; }
  double log_at(std::size_t idx) const { return log_table_[idx]; }
  const std::vector<double>& log_table() const { return log_table_; }
  std::size_t index_of(const std::vector<int>& values) const;
  // Slots j, j' share a class when every permutation among them leaves the
  // table unchanged. Entry = smallest slot of the class.
  const std::vector<int>& slot_class() const { return slot_class_; }

 private:
  std::string id_;
  int q_, arity_;
  std::vector<double> table_, log_table_;
  std::vector<int> slot_class_;
};

using WeightPtr = std::shared_ptr<const WeightFunction>;

struct FactorRow {
  int weight = 0;               // index into ModelSpec::weights
  std::vector<int> clone_types; // size = degree
};

struct ModelSpec {
  std::string family;           // free-form description
  Alphabet alphabet;
  int max_degree = kDefaultMaxDegree;
  std::vector<std::vector<int>> variables;  // clone types per variable
  std::vector<FactorRow> factors;
  std::vector<WeightPtr> weights;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

// Structured validation; never throws.
std::vector<Diagnostic> validate(const ModelSpec& spec);

// Validated model with clone bookkeeping.
class Model {
 public:
  static std::shared_ptr<const Model> create(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  int n() const { return static_cast<int>(spec_.variables.size()); }
  int m() const { return static_cast<int>(spec_.factors.size()); }
  int q() const { return spec_.alphabet.size(); }
  int num_clones() const { return static_cast<int>(var_owner_.size()); }

  int var_degree(int x) const { return static_cast<int>(spec_.variables[static_cast<std::size_t>(x)].size()); }
  int factor_degree(int a) const { return static_cast<int>(spec_.factors[static_cast<std::size_t>(a)].clone_types.size()); }
  int var_clone(int x, int i) const { return var_offset_[static_cast<std::size_t>(x)] + i; }
  int factor_clone(int a, int j) const { return factor_offset_[static_cast<std::size_t>(a)] + j; }
  std::pair<int, int> var_clone_owner(int c) const { return var_owner_[static_cast<std::size_t>(c)]; }
  std::pair<int, int> factor_clone_owner(int c) const { return factor_owner_[static_cast<std::size_t>(c)]; }
  int var_clone_type(int c) const;
  int factor_clone_type(int c) const;
  const WeightFunction& weight_of(int a) const {
    return *spec_.weights[static_cast<std::size_t>(spec_.factors[static_cast<std::size_t>(a)].weight)];
  }
  const WeightPtr& weight_ptr_of(int a) const {
    return spec_.weights[static_cast<std::size_t>(spec_.factors[static_cast<std::size_t>(a)].weight)];
  }

 private:
  explicit Model(ModelSpec spec);
  ModelSpec spec_;
  std::vector<int> var_offset_, factor_offset_;
  std::vector<std::pair<int, int>> var_owner_, factor_owner_;
};

using ModelPtr = std::shared_ptr<const Model>;

bool same_structure(const Model& a, const Model& b);

// Weight-function identifiers carry parameters at full precision.
std::string format_param(double v);

WeightPtr ising_weight(double beta);
WeightPtr potts_weight(int k, double beta);
// Clause with literal signs s (+1 positive, -1 negative); penalised when sigma = -s.
WeightPtr ksat_weight(const std::vector<int>& signs, double beta);

ModelPtr ising(int n, int d, double beta);
ModelPtr potts(int n, int d, int k, double beta);
// degrees[x] = (#positive occurrences, #negative occurrences). Clause literal
// signs are a uniformly random arrangement (seeded) of the available signs.
ModelPtr ksat(int n, int k, double beta, const std::vector<std::pair<int, int>>& degrees, std::uint64_t sign_seed = 0);
ModelPtr ksat_regular(int n, int k, double beta, int positive, int negative, std::uint64_t sign_seed = 0);

// Spin symbol index -> spin value for the {-1,+1} alphabet.
inline int spin_of(int symbol) { return symbol == 0 ? -1 : 1; }

}  // namespace bethelab
