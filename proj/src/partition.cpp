#include "bethelab/partition.hpp"

#include <stdexcept>

#include "bethelab/rng.hpp"

namespace bethelab {

double log_weight(const FactorGraph& g, const std::vector<int>& sigma) {
  const Model& M = g.model();
  if (static_cast<int>(sigma.size()) != M.n()) throw std::invalid_argument("assignment length mismatch");
  double lw = 0;
  std::vector<int> vals;
  for (int a = 0; a < M.m(); ++a) {
    vals.clear();
    for (int j = 0; j < M.factor_degree(a); ++j) vals.push_back(sigma[static_cast<std::size_t>(g.var_at(a, j))]);
    lw += M.weight_of(a).log_at(M.weight_of(a).index_of(vals));
  }
  return lw;
}

double weight(const FactorGraph& g, const std::vector<int>& sigma) { return std::exp(log_weight(g, sigma)); }

PartitionFunction partition_function_exact(const FactorGraph& g, const EnumerationOptions& opt) {
  PartitionFunction r;
  LogSum ls;
  long double direct = 0;
  walk_assignments(g, opt.cap, [&](std::size_t, const std::vector<int>& s, const std::vector<std::size_t>&, double lw) {
    ++r.assignments;
    if (opt.support && !opt.support(s)) return;
    ++r.supported;
    ls.add(lw);
    direct += std::exp(static_cast<long double>(lw));
  });
  r.log_z = ls.value();
  r.z = static_cast<double>(direct);
  return r;
}

DenseMeasure gibbs(const FactorGraph& g, const EnumerationOptions& opt) {
  std::vector<double> lw(checked_pow(g.q(), g.n()));
  walk_assignments(g, opt.cap, [&](std::size_t idx, const std::vector<int>& s, const std::vector<std::size_t>&, double w) {
    lw[idx] = (opt.support && !opt.support(s)) ? -std::numeric_limits<double>::infinity() : w;
  });
  return DenseMeasure::from_log_weights(g.model().spec().alphabet, g.n(), lw);
}

ConcentrationProbe concentration_probe(const ModelPtr& model, int samples, std::uint64_t seed, std::uint64_t cap) {
  if (samples < 2) throw std::invalid_argument("concentration_probe needs at least 2 samples");
  ConcentrationProbe p;
  p.n = model->n();
  p.samples = samples;
  EnumerationOptions opt;
  opt.cap = cap;
  for (int s = 0; s < samples; ++s) {
    FactorGraph g = sample_graph(model, derive_seed(seed, "concentration", static_cast<std::uint64_t>(s)));
    p.log_z.push_back(partition_function_exact(g, opt).log_z);
  }
  double mean = 0;
  for (double v : p.log_z) mean += v;
  mean /= samples;
  double var = 0;
  for (double v : p.log_z) var += (v - mean) * (v - mean);
  var /= (samples - 1);
  p.mean_log_z = mean;
  p.var_log_z = var;
  p.var_over_n = var / p.n;
  p.var_over_n2 = var / (static_cast<double>(p.n) * p.n);
  return p;
}

}  // namespace bethelab
