#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bethelab/bethe.hpp"
#include "bethelab/errors.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"

namespace bethelab {

// Depth-ell key of every variable and depth-(ell+1) key of every constraint.
struct LocalIndex {
  int depth = 0;
  int n = 0, m = 0, q = 0;
  std::vector<std::string> var_key, factor_key;
  std::map<std::string, int> var_count, factor_count;
  std::map<std::string, int> var_degree;
  std::map<std::string, bool> var_tree;
  std::map<std::string, WeightPtr> factor_weight;
  // per variable, branch token behind each clone (enhanced clone tag)
  std::vector<std::vector<std::string>> var_tokens;
  // per constraint, canonical position -> slot
  std::vector<std::vector<int>> factor_canon;
  // variable key seen through each canonical position of a constraint key
  std::map<std::string, std::vector<std::string>> factor_slots;
  // tag of the variable clone seen through each canonical position
  std::map<std::string, std::vector<std::string>> factor_slot_tag;
};

LocalIndex local_index(const FactorGraph& g, int ell);
// G and G' are ell-equivalent: every node has the same key in both.
bool same_local_class(const LocalIndex& a, const LocalIndex& b);
bool same_local_class(const FactorGraph& a, const FactorGraph& b, int ell);
// Same test against a graph, stopping at the first node whose key differs.
bool in_local_class(const LocalIndex& base, const FactorGraph& h);
// Node-labelled class signature (equal iff same_local_class).
std::string class_signature(const LocalIndex& idx);

struct MarginalSequence {
  int depth = 0;
  int q = 0;
  std::map<std::string, Dist> variables;  // depth-ell variable keys
  std::map<std::string, Dist> factors;    // depth-(ell+1) constraint keys, joints on Omega^d
};

MarginalSequence empirical_sequence(const LocalIndex& idx, const FactorGraph& g, const std::vector<int>& sigma);
MarginalSequence empirical_sequence(const FactorGraph& g, const std::vector<int>& sigma, int ell);
// q_T = p_T on G's keys; variable keys with cyclic neighbourhoods get the
// uniform distribution and the constraint joints are rebuilt from the slot
// marginals.
MarginalSequence sequence_from_assignment(const LocalIndex& idx, const MarginalAssignment& p);

// max over variable keys and symbols of the balance residual (per node).
double ms3_residual(const LocalIndex& idx, const MarginalSequence& q);
double graph_bethe(const LocalIndex& idx, const MarginalSequence& q);
double graph_bethe(const FactorGraph& g, int ell, const MarginalSequence& q);

struct RestrictionWindow {
  int ell = 0;
  MarginalSequence q;
  double delta = 0;
};

struct RestrictedPartition {
  double log_z = 0;
  double z = 0;
  std::uint64_t admitted = 0;
  std::uint64_t assignments = 0;
};

RestrictedPartition restricted_partition(const FactorGraph& g, const RestrictionWindow& w,
                                         std::uint64_t cap = kDefaultAssignmentCap);
RestrictedPartition restricted_partition(const FactorGraph& g, const LocalIndex& idx, const RestrictionWindow& w,
                                         std::uint64_t cap = kDefaultAssignmentCap);

// Enhanced clone types (depth-ell key, clone tag), numbered; constraint
// clones inherit the type of their partner in g.
struct EnhancedTypes {
  std::vector<int> var_class, factor_class;
  int num_types = 0;
};
EnhancedTypes enhanced_types(const FactorGraph& g, const LocalIndex& idx);
// Whether g is acyclic enough for the full resampling guarantee.
bool resampling_guarantee(const FactorGraph& g, int ell);
// Uniform member of the enhanced configuration model. With strict set, refuses
// graphs lacking the acyclicity guarantee.
FactorGraph resample_local_class(const FactorGraph& g, int ell, std::uint64_t seed, bool strict = false);
FactorGraph resample_local_class(const FactorGraph& g, const EnhancedTypes& types, std::uint64_t seed);

enum class MomentMode { Formula, MonteCarlo };

struct MomentEstimate {
  std::string mode;
  double value = 0;          // log scale
  double band = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double acceptance_rate = 1;  // fraction of resamples in the local class
  // Monte-Carlo extras
  bool filtered = false;       // whether value includes the acyclicity event
  double class_value = 0;      // log E[Z_{l,q,d} | class]
  double filtered_value = 0;   // log E[1{A_{2l+5}} Z_{l,q,d} | class]
  double acyclic_rate = 0;     // P(A_{2l+5} | class)
  std::uint64_t in_class = 0;
};

MomentEstimate conditional_first_moment(const FactorGraph& g, const RestrictionWindow& w, MomentMode mode,
                                        std::uint64_t samples = 0, std::uint64_t seed = 0,
                                        std::uint64_t cap = kDefaultAssignmentCap, bool filter = false);

struct JudiciousResult {
  bool judicious = false;
  double score = 0;
};
JudiciousResult is_judicious(const FactorGraph& g, const std::vector<int>& sigma, const MarginalAssignment& p,
                             double eps, int ell);

struct QValidCount {
  double value = 0;       // log of the psi-weighted ratio sum, closed form
  double band = 0;        // sqrt(n)
  double rounding_residual = 0;
  MarginalSequence rounded;
  std::map<std::string, std::vector<long>> var_counts, factor_counts;
};

// Rounds q_T * n_T to integers (largest remainder) and checks that a q-valid
// clone assignment exists; throws Infeasible otherwise.
QValidCount count_q_valid_ratio(const FactorGraph& g, int ell, const MarginalSequence& q);

}  // namespace bethelab
