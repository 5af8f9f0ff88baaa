#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bethelab/measure.hpp"

namespace bethelab {

enum class Verdict { Regular, Irregular, Unknown };
enum class RegularityStrategy { Auto, Exact, WitnessSearch };

inline constexpr int kExactRegularityCap = 18;

const char* to_string(Verdict v);

struct RegularityOptions {
  RegularityStrategy strategy = RegularityStrategy::Auto;
  int exact_cap = kExactRegularityCap;
};

struct RegularityResult {
  Verdict verdict = Verdict::Unknown;
  Coords witness;             // lexicographically smallest violating S (Irregular only)
  double witness_value = 0;   // <TV(sigma[.|S], sigma[.|U])> at the witness
  std::string strategy;       // "exact" or "witness-search"
  std::uint64_t subsets_examined = 0;
};

// <TV(sigma[.|S], sigma[.|U])>_mu.
double subset_deviation(const DenseMeasure& mu, const Coords& U, const Coords& S);

// Smallest |S| that counts in the regularity condition: |S| >= eps |U|.
int min_subset_size(double eps, std::size_t usize);

RegularityResult is_regular_on(const DenseMeasure& mu, const Coords& U, double eps,
                               const RegularityOptions& opt = {});

struct PartitionRegularity {
  Verdict verdict = Verdict::Unknown;
  std::vector<RegularityResult> classes;
  int irregular_size = 0;  // total size of classes with an irregularity witness
  int unknown_size = 0;
};

// mu is eps-regular w.r.t. V when the classes on which it is not regular
// have total size < eps n.
PartitionRegularity regularity_wrt(const DenseMeasure& mu, const Partition& V, double eps,
                                   const RegularityOptions& opt = {});

void validate_partition(const Partition& V, int n);
Partition canonical_partition(Partition V);
Partition common_refinement(const Partition& a, const Partition& b, int n);
Partition trivial_partition(int n);

double index(const DenseMeasure& mu, const Partition& V);

struct RefinementStep {
  Partition before, after;
  std::vector<int> split_classes;   // indices into `before`
  std::vector<Coords> witnesses;
  double index_before = 0, index_after = 0;
  bool premise_held = false;        // irregular classes cover at least eps n coordinates
};

RefinementStep refine_irregular(const DenseMeasure& mu, const Partition& V, double eps,
                                const RegularityOptions& opt = {});

struct StateClass {
  AssignmentSet members;
  double mass = 0;
  std::vector<int> cell;  // mesh cell: per class, per symbol bin index
};

// Partition of Omega^n by the mesh cell of (sigma[.|V_1], ..., sigma[.|V_k]),
// grid pitch eps/|Omega|. Cells are ordered lexicographically.
std::vector<StateClass> state_partition(const DenseMeasure& mu, const Partition& V, double eps);

struct HomogeneityReport {
  bool hm1 = false, hm2 = false, hm3 = false, hm4 = false;
  double excluded_mass = 0;      // mass of states outside I
  double max_state_diameter = 0; // largest within-state TV over all classes
  int states = 0;
  int states_in_I = 0;
  std::vector<std::string> failures;
  bool ok() const { return hm1 && hm2 && hm3 && hm4; }
};

HomogeneityReport check_homogeneity(const DenseMeasure& mu, const Partition& V,
                                    const std::vector<AssignmentSet>& states,
                                    const std::vector<int>& I, double eps,
                                    const RegularityOptions& opt = {});

struct SplitRecord {
  int iteration = 0;
  std::string target;  // "mu", "state:<i>", or "mu:state-driven"
  double index_before = 0, index_after = 0;
  double bound = 0;    // guaranteed minimum drop
  bool premise_held = false;
};

struct Decomposition {
  double eps = 0;
  Partition V;
  std::vector<StateClass> states;
  std::vector<int> I;
  HomogeneityReport report;
  std::vector<SplitRecord> splits;
  int iterations = 0;
  std::uint64_t iteration_bound = 0;
};

std::uint64_t decomposition_iteration_bound(int q, double eps);

Decomposition decompose(const DenseMeasure& mu, const Partition& V0, double eps,
                        const RegularityOptions& opt = {});

}  // namespace bethelab
