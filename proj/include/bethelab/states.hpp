#pragma once

#include <cstdint>
#include <vector>

#include "bethelab/measure.hpp"
#include "bethelab/regularity.hpp"

namespace bethelab {

struct StateCheck {
  bool passes = false;
  double score = 0;  // (1/n^k) sum over k-tuples of TV(joint, product of marginals)
};

inline constexpr std::uint64_t kDefaultStateWorkCap = std::uint64_t{1} << 31;

// Tuples with a repeated coordinate contribute zero (see README, "Conventions").
StateCheck is_state(const DenseMeasure& mu, const AssignmentSet& S, double eps, int k,
                    std::uint64_t work_cap = kDefaultStateWorkCap);
StateCheck is_symmetric(const DenseMeasure& mu, double eps, int k,
                        std::uint64_t work_cap = kDefaultStateWorkCap);
AssignmentSet full_set(const DenseMeasure& mu);

struct ExtractionOptions {
  double atom_eps = 0.3;   // resolution of the decomposition that defines the atoms
  double min_mass = 0.0;   // groups lighter than this are dropped
  RegularityOptions regularity{};
  std::uint64_t work_cap = kDefaultStateWorkCap;
};

struct ExtractedStates {
  std::vector<AssignmentSet> states;
  std::vector<double> masses;
  std::vector<double> scores;
  double coverage = 0;
  bool covers = false;      // coverage >= 1 - eps
  Partition atom_partition;
  int atoms = 0;
  int dropped_groups = 0;
};

ExtractedStates extract_states(const DenseMeasure& mu, double eps, int k, const ExtractionOptions& opt = {});

inline constexpr std::uint64_t kTensorCap = std::uint64_t{1} << 22;

// mu (x) mu on (Omega x Omega)^n; pair (a,b) has symbol index a*q + b.
DenseMeasure tensor_square(const DenseMeasure& mu, std::uint64_t cap = kTensorCap);
Alphabet tensor_alphabet(const Alphabet& a);

}  // namespace bethelab
