#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bethelab/errors.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/local.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/model.hpp"
#include "bethelab/templates.hpp"

namespace bethelab {

inline constexpr double kIpfTolerance = 1e-10;
inline constexpr int kIpfMaxSweeps = 100000;

struct JointResult {
  Dist joint;
  double residual = 0;
  int sweeps = 0;
};

// argmax H(nu) + <ln psi>_nu subject to the slot marginals, by iterative
// proportional fitting started from psi * prod_j m_j.
JointResult max_entropy_joint_ipf(const WeightFunction& psi, const std::vector<Dist>& marginals,
                                  double tol = kIpfTolerance, int max_sweeps = kIpfMaxSweeps);
Dist max_entropy_joint(const WeightFunction& psi, const std::vector<Dist>& marginals);
// H(nu) + <ln psi>_nu
double constraint_objective(const WeightFunction& psi, const Dist& nu);
std::vector<Dist> joint_marginals(const Dist& nu, int q, int arity);

// Per-node clamp: -1 for free, otherwise a symbol index. Only variables may be
// clamped.
using Clamp = std::vector<int>;

// Exact root marginal of a tree template by sum-product. Truncated slots are
// treated as absent constraints.
Dist tree_root_marginal(const Template& t, const Clamp& clamp = {});

struct MarginalAssignment {
  int depth = 0;
  int q = 0;
  int extension = 0;              // depth-extension parameter m
  bool fixed_point = false;       // m-stability certified
  double fixed_point_gap = -1;    // max TV between m and m+1, if measured
  std::map<std::string, Dist> variables;  // variable keys at depth ell
  std::map<std::string, Dist> factors;    // constraint keys at depth ell+1
  // for each constraint key, the variable keys seen through each slot
  std::map<std::string, std::vector<std::string>> factor_slots;

  const Dist& variable(const std::string& key) const;
  const Dist& factor(const std::string& key) const;
};

// theta_ext must be a limit distribution at depth ell + m.
MarginalAssignment build_marginal_assignment(const LocalDistribution& theta_ext, int ell, int m);
// Increase m from 1 until consecutive assignments agree within tol (max TV
// over variable keys) or m_max is reached.
MarginalAssignment build_marginal_assignment_auto(const BranchingLaw& law, int ell, int m_max = 4,
                                                  double tol = 1e-8, const LimitOptions& opt = {});

double ma2_residual(const MarginalAssignment& p);
// Uniform p on every key of theta (used at beta = 0 and for symmetric models).
MarginalAssignment uniform_assignment(const LocalDistribution& theta);

double bethe_free_energy(const LocalDistribution& theta, const MarginalAssignment& p);

enum class UniquenessMode { Exhaustive, Sampled };
enum class UniquenessVerdict { Unique, NotUnique, Unknown };
inline constexpr int kDefaultBoundaryCap = 16;

struct UniquenessResult {
  UniquenessVerdict verdict = UniquenessVerdict::Unknown;
  double worst_tv = 0;
  std::vector<int> worst_boundary;  // symbol per boundary variable
  std::vector<int> boundary_nodes;  // template node ids
  std::uint64_t boundaries_checked = 0;
};

struct UniquenessOptions {
  UniquenessMode mode = UniquenessMode::Exhaustive;
  int cap = kDefaultBoundaryCap;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 1;
};

// Boundary = variables at depth ell (bipartite distance 2*ell) of the tree.
UniquenessResult gibbs_uniqueness_check(const Template& t, const MarginalAssignment& p, double eps, int ell,
                                        const UniquenessOptions& opt = {});
const char* to_string(UniquenessVerdict v);

// Boundary draws Sigma ~ mu_G; samples = 0 takes the exact expectation.
double nonreconstruction_estimate(const FactorGraph& g, const MarginalAssignment& p, int ell, std::uint64_t samples,
                                  std::uint64_t seed, std::uint64_t cap = kDefaultAssignmentCap);

}  // namespace bethelab
