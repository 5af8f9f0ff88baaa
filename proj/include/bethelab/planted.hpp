#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "bethelab/errors.hpp"
#include "bethelab/graph.hpp"

namespace bethelab {

struct PlantedOptions {
  int ell = 0;
  std::uint64_t batch = 64;          // proposals used to estimate a class envelope
  double floor = 1e-3;               // minimum acceptance rate
  std::uint64_t cap = kDefaultAssignmentCap;
  std::uint64_t max_proposals_per_draw = 1000000;
};

struct PlantedDiagnostics {
  std::uint64_t draws = 0;
  std::uint64_t proposals = 0;      // within-class resamples attempted
  std::uint64_t in_class = 0;       // proposals that stayed in the class
  std::uint64_t accepted = 0;
  std::uint64_t envelope_violations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t classes_seen = 0;
  std::uint64_t forced_classes = 0; // classes whose resampler can only return the base graph
  double acceptance_rate() const { return in_class ? static_cast<double>(accepted) / static_cast<double>(in_class) : 0.0; }
  double class_hit_rate() const { return proposals ? static_cast<double>(in_class) / static_cast<double>(proposals) : 0.0; }
};

// Two-stage sampler for the planted law: a uniform graph fixes the local
// class, then a member of the class is accepted with probability Z/envelope.
class PlantedSampler {
 public:
  PlantedSampler(ModelPtr model, std::uint64_t seed, PlantedOptions opt = {});

  FactorGraph draw();
  const PlantedDiagnostics& diagnostics() const { return diag_; }
  // log of a certified upper bound on Z over all graphs of the model
  double certified_log_bound() const { return log_bound_; }

 private:
  double envelope(const std::string& signature, const FactorGraph& base);

  ModelPtr model_;
  std::uint64_t seed_;
  PlantedOptions opt_;
  PlantedDiagnostics diag_;
  double log_bound_ = 0;
  std::map<std::string, double> envelopes_;
};

}  // namespace bethelab
