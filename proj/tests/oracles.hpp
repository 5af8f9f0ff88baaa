#pragma once

// Independent reference computations. Nothing here calls the library routine
// it is meant to check; they share only data types.

#include <cstdint>
#include <map>
#include <vector>

#include "bethelab/bethe.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/moments.hpp"
#include "bethelab/templates.hpp"

namespace oracle {

using namespace bethelab;

// trace(T^n) for the 2x2 Ising transfer matrix, by repeated multiplication
double ising_cycle_z(int n, double beta);

// sum over sigma of prod_a psi_a, with its own odometer and table indexing
long double brute_z(const FactorGraph& g);
double brute_log_z(const FactorGraph& g);

// (1/(q n)) sum_w sum_j sum_{x in V_j} E[(1{s_x=w} - s[w|V_j])^2], literally
double naive_index(const DenseMeasure& mu, const Partition& V);

// <TV(s[.|S], s[.|U])>_mu by explicit counting
double naive_subset_deviation(const DenseMeasure& mu, const Coords& U, const Coords& S);

// Root marginal of a tree template by summing over all assignments of its
// variable nodes.
Dist brute_tree_marginal(const Template& t, const Clamp& clamp = {});

// Pairwise, q=2: maximise H + <ln psi> over the one free parameter of the
// joint with the given marginals, by golden-section search on a concave
// function.
Dist golden_max_entropy(const WeightFunction& psi, const Dist& m0, const Dist& m1);

// Cycle type (sorted component sizes, counted in constraints) of a graph in
// which every node has degree 2.
std::vector<int> cycle_type(const FactorGraph& g);

// Exact law of the cycle type of a uniform matching of n degree-2 variables
// into n degree-2 constraints of a single type, by following the sequential
// exploration: the walk closes with probability 1/(1+2u) when u fresh
// variables remain.
std::map<std::vector<int>, double> uniform_cycle_type_law(int n);

// Cycle-type counts over all (2n)! matchings, by explicit enumeration.
std::map<std::vector<int>, std::uint64_t> enumerate_cycle_types(int n);

// cycle-type law of the planted 2-regular Ising model with depth-0 classes
std::map<std::vector<int>, double> planted_cycle_type_law(int n, double beta);
// Z of a disjoint union of Ising cycles of the given lengths.
double ising_cycle_union_z(const std::vector<int>& type, double beta);

// Z_{l,q,delta}: enumerate sigma, build the per-key counts directly, keep sigma
// when every key is within delta in total variation. Constraint joints are
// compared in slot order, so targets must be invariant under the canonical
// reordering (e.g. symmetric pairwise joints).
double filtered_log_z(const FactorGraph& g, const LocalIndex& idx, const MarginalSequence& q, double delta);

// log of sum over q-valid clone assignments of psi(sigma) * |G(M(G,sigma,l))| / |G(M(G,l))|,
// by enumerating variable values and constraint-clone values outright.
// var_counts/factor_counts are the integer targets per key (factor cells in
// canonical slot order).
double q_valid_log_ratio(const FactorGraph& g, const LocalIndex& idx, const std::map<std::string, std::vector<long>>& var_counts,
                         const std::map<std::string, std::vector<long>>& factor_counts);

// Pearson chi-square p-value; cells with expectation below min_expected are
// pooled into one.
double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected, double min_expected = 5.0);

}  // namespace oracle
