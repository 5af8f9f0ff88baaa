#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "bethelab/errors.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"

namespace bethelab {

struct EnumerationOptions {
  std::uint64_t cap = kDefaultAssignmentCap;
  // Optional restriction of the sum to {sigma : support(sigma)}.
  std::function<bool(const std::vector<int>&)> support;
};

// Calls f(index, sigma, factor_table_index, log_weight) for every sigma in
// lexicographic order. Factor table indices are maintained incrementally; the
// log weight is re-summed from the tables at every step.
template <class F>
void walk_assignments(const FactorGraph& g, std::uint64_t cap, F&& f) {
  const Model& M = g.model();
  const int n = M.n(), m = M.m(), q = M.q();
  check_budget("exhaustive enumeration of Omega^n", saturating_pow(static_cast<std::uint64_t>(q), n), cap);
  std::vector<std::vector<std::pair<int, std::size_t>>> touch(static_cast<std::size_t>(n));
  std::vector<const double*> lt(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    const int h = M.factor_degree(a);
    lt[static_cast<std::size_t>(a)] = M.weight_of(a).log_table().data();
    std::size_t stride = 1;
    for (int j = h - 1; j >= 0; --j) {
      touch[static_cast<std::size_t>(g.var_at(a, j))].emplace_back(a, stride);
      stride *= static_cast<std::size_t>(q);
    }
  }
  std::vector<std::size_t> fidx(static_cast<std::size_t>(m), 0);
  std::vector<int> sigma(static_cast<std::size_t>(n), 0);
  const std::size_t total = checked_pow(q, n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double lw = 0;
    for (int a = 0; a < m; ++a) lw += lt[static_cast<std::size_t>(a)][fidx[static_cast<std::size_t>(a)]];
    f(idx, static_cast<const std::vector<int>&>(sigma), static_cast<const std::vector<std::size_t>&>(fidx), lw);
    for (int x = n - 1; x >= 0; --x) {
      auto& sx = sigma[static_cast<std::size_t>(x)];
      if (sx + 1 < q) {
        ++sx;
        for (auto [a, st] : touch[static_cast<std::size_t>(x)]) fidx[static_cast<std::size_t>(a)] += st;
        break;
      }
      for (auto [a, st] : touch[static_cast<std::size_t>(x)]) fidx[static_cast<std::size_t>(a)] -= static_cast<std::size_t>(q - 1) * st;
      sx = 0;
    }
  }
}

// Streaming log-sum-exp.
class LogSum {
 public:
  void add(double lw) {
    if (lw == -std::numeric_limits<double>::infinity()) return;
    if (lw > max_) {
      sum_ = sum_ * std::exp(max_ - lw) + 1.0;
      max_ = lw;
    } else {
      sum_ += std::exp(lw - max_);
    }
  }
  double value() const { return sum_ > 0 ? max_ + std::log(sum_) : -std::numeric_limits<double>::infinity(); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0;
};

double log_weight(const FactorGraph& g, const std::vector<int>& sigma);
double weight(const FactorGraph& g, const std::vector<int>& sigma);

struct PartitionFunction {
  double log_z = 0;      // log-domain accumulation
  double z = 0;          // direct-domain sum (may overflow to inf)
  std::uint64_t assignments = 0;
  std::uint64_t supported = 0;
};

PartitionFunction partition_function_exact(const FactorGraph& g, const EnumerationOptions& opt = {});
DenseMeasure gibbs(const FactorGraph& g, const EnumerationOptions& opt = {});

struct ConcentrationProbe {
  int n = 0;
  int samples = 0;
  double mean_log_z = 0;
  double var_log_z = 0;  // unbiased sample variance
  double var_over_n = 0;
  double var_over_n2 = 0;
  std::vector<double> log_z;
};

ConcentrationProbe concentration_probe(const ModelPtr& model, int samples, std::uint64_t seed,
                                       std::uint64_t cap = kDefaultAssignmentCap);

}  // namespace bethelab
