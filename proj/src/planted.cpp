#include "bethelab/planted.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bethelab/moments.hpp"
#include "bethelab/partition.hpp"
#include "bethelab/rng.hpp"

namespace bethelab {

PlantedSampler::PlantedSampler(ModelPtr model, std::uint64_t seed, PlantedOptions opt)
    : model_(std::move(model)), seed_(seed), opt_(opt) {
  if (!model_) throw std::invalid_argument("planted sampler needs a model");
  if (opt_.batch == 0) throw std::invalid_argument("planted sampler needs batch >= 1");
  check_budget("exhaustive enumeration of Omega^n", saturating_pow(static_cast<std::uint64_t>(model_->q()), model_->n()), opt_.cap);
  // Z(G) <= q^n * prod_a max psi_a for every graph
  log_bound_ = model_->n() * std::log(static_cast<double>(model_->q()));
  for (int a = 0; a < model_->m(); ++a) {
    const auto& t = model_->weight_of(a).log_table();
    log_bound_ += *std::max_element(t.begin(), t.end());
  }
}

double PlantedSampler::envelope(const std::string& signature, const FactorGraph& base) {
  auto it = envelopes_.find(signature);
  if (it != envelopes_.end()) return it->second;
  ++diag_.classes_seen;
  EnumerationOptions eo;
  eo.cap = opt_.cap;
  double best = partition_function_exact(base, eo).log_z;
  const int ell = opt_.ell;
  LocalIndex bi = local_index(base, ell);
  EnhancedTypes types = enhanced_types(base, bi);
  for (std::uint64_t b = 0; b < opt_.batch; ++b) {
    FactorGraph h = resample_local_class(base, types, derive_seed(seed_, "planted/envelope/" + signature, b));
    if (!in_local_class(bi, h)) continue;
    best = std::max(best, partition_function_exact(h, eo).log_z);
  }
  const double env = std::min(best + std::log(2.0), log_bound_);
  envelopes_[signature] = env;
  return env;
}

FactorGraph PlantedSampler::draw() {
  const std::uint64_t i = diag_.draws++;
  Rng rng = Rng(seed_, "planted/draw").fork(i);
  FactorGraph base = sample_graph(model_, rng.next());
  LocalIndex bi = local_index(base, opt_.ell);
  const std::string sig = class_signature(bi);
  EnhancedTypes types = enhanced_types(base, bi);
  bool forced = true;
  {
    std::map<int, int> sizes;
    for (int c : types.var_class) forced = forced && ++sizes[c] == 1;
  }
  if (forced) ++diag_.forced_classes;
  EnumerationOptions eo;
  eo.cap = opt_.cap;
  double env = envelope(sig, base);
  for (std::uint64_t tries = 0; tries < opt_.max_proposals_per_draw; ++tries) {
    FactorGraph h = resample_local_class(base, types, rng.next());
    ++diag_.proposals;
    if (!in_local_class(bi, h)) continue;
    ++diag_.in_class;
    const double lz = partition_function_exact(h, eo).log_z;
    if (lz > env + 1e-12) {
      // the envelope was too low: raise it and restart this draw's class stage
      ++diag_.envelope_violations;
      ++diag_.restarts;
      while (env < lz) env += std::log(2.0);
      env = std::min(env, log_bound_);
      envelopes_[sig] = env;
      continue;
    }
    if (rng.uniform() < std::exp(lz - env)) {
      ++diag_.accepted;
      return h;
    }
    if (diag_.in_class >= opt_.batch && diag_.acceptance_rate() < opt_.floor)
      throw std::runtime_error("planted sampler: acceptance rate " + std::to_string(diag_.acceptance_rate()) +
                               " fell below the floor; increase the envelope batch");
  }
  throw std::runtime_error("planted sampler: proposal limit reached; increase the envelope batch");
}

}  // namespace bethelab
