#pragma once

#include <cstdint>
#include <string>

#include "bethelab/graph.hpp"
#include "bethelab/local.hpp"
#include "bethelab/model.hpp"

namespace bethelab {

// Named model family. ksat uses `positive`/`negative` occurrences per variable.
struct FamilySpec {
  std::string name;  // "ising", "potts" or "ksat"
  int d = 3;
  int k = 3;
  double beta = 0;
  int positive = 1;
  int negative = 1;
};

FamilySpec parse_family(const std::string& name, int d, int k, double beta, int positive, int negative);
ModelPtr make_model(const FamilySpec& f, int n, std::uint64_t seed = 0);
BranchingLaw make_law(const FamilySpec& f);
// Whether n satisfies the family's divisibility constraint.
bool admissible_size(const FamilySpec& f, int n);

// Single n-cycle on a pairwise model with every variable of degree 2:
// clone 1 of x meets slot 0 of constraint x, clone 0 of x+1 meets its slot 1.
FactorGraph ring(const ModelPtr& model);

}  // namespace bethelab
