#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/templates.hpp"

namespace bethelab {

struct LocalEntry {
  double weight = 0;
  Template representative;
};

// Distribution over template keys: variable roots at depth `depth`,
// constraint roots at depth `depth + 1`.
struct LocalDistribution {
  int depth = 0;
  std::map<std::string, LocalEntry> entries;
  std::string mode = "exact";  // "exact", "sampled" or "empirical"
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  double variable_share() const;
  double factor_share() const;
  double weight(const std::string& key) const;
};

LocalDistribution local_distribution(const FactorGraph& g, int depth);
double tv_to(const LocalDistribution& a, const LocalDistribution& b);

struct VarKind {
  std::vector<int> clone_types;
};
struct FactorKind {
  WeightPtr weight;
  std::vector<int> clone_types;
};

// Offspring law of the local weak limit of a configuration model.
struct BranchingLaw {
  std::string family;
  int q = 0;
  double factors_per_variable = 0;  // |F| / |V|
  std::vector<std::pair<VarKind, double>> root_variables;
  std::vector<std::pair<FactorKind, double>> root_factors;
  // clone type -> (constraint kind, slot it attaches through, probability)
  std::map<int, std::vector<std::tuple<FactorKind, int, double>>> factor_given_type;
  // clone type -> (variable kind, clone it attaches through, probability)
  std::map<int, std::vector<std::tuple<VarKind, int, double>>> variable_given_type;
};

// Limit law read off the type statistics of a finite model.
BranchingLaw branching_law(const Model& m);
BranchingLaw ising_law(int d, double beta);
BranchingLaw potts_law(int d, int k, double beta);
// degree_distribution: ((positive, negative) occurrences, probability).
BranchingLaw ksat_law(int k, double beta, const std::vector<std::pair<std::pair<int, int>, double>>& degree_distribution);

struct LimitOptions {
  std::size_t max_trees = 200000;   // exact enumeration cap per root kind
  std::uint64_t samples = 20000;    // used when the cap is exceeded
  std::uint64_t seed = 1;
  bool allow_sampling = true;
};

LocalDistribution limit_tree(const BranchingLaw& law, int depth, const LimitOptions& opt = {});

}  // namespace bethelab
