#include "bethelab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "bethelab/partition.hpp"
#include "bethelab/rng.hpp"

namespace bethelab {

LocalIndex local_index(const FactorGraph& g, int ell) {
  if (ell < 0) throw std::invalid_argument("local_index: negative depth");
  LocalIndex idx;
  idx.depth = ell;
  idx.n = g.n();
  idx.m = g.m();
  idx.q = g.q();
  for (int x = 0; x < g.n(); ++x) {
    Template t = variable_neighborhood(g, x, ell);
    KeyInfo ki = key_info(t);
    if (!idx.var_count.count(ki.key)) {
      idx.var_tree[ki.key] = t.is_tree();
      idx.var_degree[ki.key] = t.root_degree();
    }
    ++idx.var_count[ki.key];
    idx.var_key.push_back(std::move(ki.key));
    idx.var_tokens.push_back(std::move(ki.slot_tokens));
  }
  for (int a = 0; a < g.m(); ++a) {
    KeyInfo ki = key_info(factor_neighborhood(g, a, ell + 1));
    if (!idx.factor_count.count(ki.key)) {
      idx.factor_weight[ki.key] = g.model().weight_ptr_of(a);
      auto& slots = idx.factor_slots[ki.key];
      auto& tags = idx.factor_slot_tag[ki.key];
      for (int j : ki.canon) {
        auto [x, i] = g.var_neighbor(a, j);
        slots.push_back(idx.var_key[static_cast<std::size_t>(x)]);
        tags.push_back(idx.var_tokens[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)]);
      }
    }
    ++idx.factor_count[ki.key];
    idx.factor_key.push_back(std::move(ki.key));
    idx.factor_canon.push_back(std::move(ki.canon));
  }
  return idx;
}

bool same_local_class(const LocalIndex& a, const LocalIndex& b) {
  return a.depth == b.depth && a.var_key == b.var_key && a.factor_key == b.factor_key;
}

bool same_local_class(const FactorGraph& a, const FactorGraph& b, int ell) {
  if (!same_structure(a.model(), b.model())) throw std::invalid_argument("same_local_class: graphs come from different models");
  return same_local_class(local_index(a, ell), local_index(b, ell));
}

bool in_local_class(const LocalIndex& base, const FactorGraph& h) {
  if (h.n() != base.n || h.m() != base.m) return false;
  // constraints first: short cycles show up there before they reach a variable key
  for (int a = 0; a < h.m(); ++a)
    if (key_info(factor_neighborhood(h, a, base.depth + 1)).key != base.factor_key[static_cast<std::size_t>(a)]) return false;
  for (int x = 0; x < h.n(); ++x)
    if (key_info(variable_neighborhood(h, x, base.depth)).key != base.var_key[static_cast<std::size_t>(x)]) return false;
  return true;
}

std::string class_signature(const LocalIndex& idx) {
  // Keys are interned so the signature stays short.
  std::map<std::string, int> id;
  std::string out = std::to_string(idx.depth) + ":";
  for (const auto* keys : {&idx.var_key, &idx.factor_key}) {
    for (const auto& k : *keys) {
      auto [it, ins] = id.try_emplace(k, static_cast<int>(id.size()));
      out += std::to_string(it->second) + ",";
    }
    out += "|";
  }
  for (const auto& [k, i] : id) out += std::to_string(i) + "=" + k + ";";
  return out;
}

namespace {

// joint index of constraint a in canonical slot order
std::size_t tuple_index(const std::vector<int>& sigma, const FactorGraph& g, const LocalIndex& li, int a) {
  std::size_t idx = 0;
  for (int j : li.factor_canon[static_cast<std::size_t>(a)])
    idx = idx * static_cast<std::size_t>(li.q) + static_cast<std::size_t>(sigma[static_cast<std::size_t>(g.var_at(a, j))]);
  return idx;
}

const Dist& lookup(const std::map<std::string, Dist>& m, const std::string& key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) throw std::out_of_range(std::string("marginal sequence has no ") + what + " key " + key);
  return it->second;
}

int arity_of(const LocalIndex& idx, const std::string& key) { return static_cast<int>(idx.factor_slots.at(key).size()); }

}  // namespace

MarginalSequence empirical_sequence(const LocalIndex& idx, const FactorGraph& g, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != g.n()) throw std::invalid_argument("empirical_sequence: assignment has wrong length");
  const int q = g.q();
  MarginalSequence s;
  s.depth = idx.depth;
  s.q = q;
  for (const auto& [k, c] : idx.var_count) s.variables[k].assign(static_cast<std::size_t>(q), 0.0);
  for (const auto& [k, c] : idx.factor_count) s.factors[k].assign(checked_pow(q, arity_of(idx, k)), 0.0);
  for (int x = 0; x < g.n(); ++x) {
    const int v = sigma[static_cast<std::size_t>(x)];
    if (v < 0 || v >= q) throw std::invalid_argument("empirical_sequence: symbol out of range");
    s.variables[idx.var_key[static_cast<std::size_t>(x)]][static_cast<std::size_t>(v)] += 1;
  }
  for (int a = 0; a < g.m(); ++a) s.factors[idx.factor_key[static_cast<std::size_t>(a)]][tuple_index(sigma, g, idx, a)] += 1;
  for (auto& [k, d] : s.variables)
    for (double& v : d) v /= idx.var_count.at(k);
  for (auto& [k, d] : s.factors)
    for (double& v : d) v /= idx.factor_count.at(k);
  return s;
}

MarginalSequence empirical_sequence(const FactorGraph& g, const std::vector<int>& sigma, int ell) {
  return empirical_sequence(local_index(g, ell), g, sigma);
}

MarginalSequence sequence_from_assignment(const LocalIndex& idx, const MarginalAssignment& p) {
  if (p.depth != idx.depth) throw std::invalid_argument("sequence_from_assignment: depth mismatch");
  MarginalSequence s;
  s.depth = idx.depth;
  s.q = idx.q;
  for (const auto& [k, c] : idx.var_count) {
    auto it = p.variables.find(k);
    if (it != p.variables.end())
      s.variables[k] = it->second;
    else if (!idx.var_tree.at(k))
      s.variables[k] = uniform_distribution(idx.q);
    else
      throw std::out_of_range("marginal assignment has no variable key " + k);
  }
  for (const auto& [k, slots] : idx.factor_slots) {
    std::vector<Dist> margs;
    for (const auto& sk : slots) margs.push_back(s.variables.at(sk));
    s.factors[k] = max_entropy_joint(*idx.factor_weight.at(k), margs);
  }
  return s;
}

double ms3_residual(const LocalIndex& idx, const MarginalSequence& q) {
  const double total = idx.n + idx.m;
  std::map<std::string, Dist> r;
  for (const auto& [k, c] : idx.var_count) r[k].assign(static_cast<std::size_t>(idx.q), 0.0);
  for (const auto& [k, slots] : idx.factor_slots) {
    const double lam = idx.factor_count.at(k) / total;
    const int h = static_cast<int>(slots.size());
    auto mg = joint_marginals(lookup(q.factors, k, "constraint"), idx.q, h);
    for (int j = 0; j < h; ++j) {
      const Dist& qt = lookup(q.variables, slots[static_cast<std::size_t>(j)], "variable");
      Dist& acc = r.at(slots[static_cast<std::size_t>(j)]);
      for (int w = 0; w < idx.q; ++w)
        acc[static_cast<std::size_t>(w)] += lam * (mg[static_cast<std::size_t>(j)][static_cast<std::size_t>(w)] - qt[static_cast<std::size_t>(w)]);
    }
  }
  double res = 0;
  for (const auto& [k, d] : r)
    for (double v : d) res = std::max(res, std::fabs(v));
  return res;
}

double graph_bethe(const LocalIndex& idx, const MarginalSequence& q) {
  double var_part = 0, fac_part = 0;
  for (const auto& [k, c] : idx.var_count)
    var_part += (1.0 - idx.var_degree.at(k)) * entropy(lookup(q.variables, k, "variable")) * c / idx.n;
  for (const auto& [k, c] : idx.factor_count) {
    // No extra -KL here: next to the (1-d)H variable term it would count the
    // correlation penalty twice (the clone-matching count has it once).
    for (const auto& sk : idx.factor_slots.at(k)) lookup(q.variables, sk, "variable");
    fac_part += constraint_objective(*idx.factor_weight.at(k), lookup(q.factors, k, "constraint")) * c / idx.m;
  }
  return var_part + (idx.m > 0 ? static_cast<double>(idx.m) / idx.n * fac_part : 0.0);
}

double graph_bethe(const FactorGraph& g, int ell, const MarginalSequence& q) { return graph_bethe(local_index(g, ell), q); }

RestrictedPartition restricted_partition(const FactorGraph& g, const RestrictionWindow& w, std::uint64_t cap) {
  return restricted_partition(g, local_index(g, w.ell), w, cap);
}

RestrictedPartition restricted_partition(const FactorGraph& g, const LocalIndex& idx, const RestrictionWindow& w, std::uint64_t cap) {
  if (w.delta < 0) throw std::invalid_argument("restricted_partition: delta must be non-negative");
  if (idx.depth != w.ell || w.q.depth != w.ell) throw std::invalid_argument("restricted_partition: depth mismatch");
  // intern keys
  std::map<std::string, int> vid, fid;
  std::vector<const Dist*> vtarget, ftarget;
  std::vector<double> vsize, fsize;
  for (const auto& [k, c] : idx.var_count) {
    vid[k] = static_cast<int>(vtarget.size());
    vtarget.push_back(&lookup(w.q.variables, k, "variable"));
    vsize.push_back(c);
  }
  for (const auto& [k, c] : idx.factor_count) {
    fid[k] = static_cast<int>(ftarget.size());
    ftarget.push_back(&lookup(w.q.factors, k, "constraint"));
    fsize.push_back(c);
  }
  std::vector<int> vk(static_cast<std::size_t>(g.n())), fk(static_cast<std::size_t>(g.m()));
  for (int x = 0; x < g.n(); ++x) vk[static_cast<std::size_t>(x)] = vid.at(idx.var_key[static_cast<std::size_t>(x)]);
  for (int a = 0; a < g.m(); ++a) fk[static_cast<std::size_t>(a)] = fid.at(idx.factor_key[static_cast<std::size_t>(a)]);
  std::vector<Dist> vc(vtarget.size()), fc(ftarget.size());
  for (std::size_t i = 0; i < vc.size(); ++i) vc[i].assign(vtarget[i]->size(), 0.0);
  for (std::size_t i = 0; i < fc.size(); ++i) fc[i].assign(ftarget[i]->size(), 0.0);
  const double limit = w.delta + 1e-12;
  auto within = [&](const std::vector<Dist>& counts, const std::vector<const Dist*>& target, const std::vector<double>& size) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < counts[i].size(); ++j) s += std::fabs(counts[i][j] / size[i] - (*target[i])[j]);
      if (0.5 * s > limit) return false;
    }
    return true;
  };
  RestrictedPartition r;
  LogSum ls;
  walk_assignments(g, cap, [&](std::size_t, const std::vector<int>& sigma, const std::vector<std::size_t>&, double lw) {
    ++r.assignments;
    for (auto& d : vc) std::fill(d.begin(), d.end(), 0.0);
    for (auto& d : fc) std::fill(d.begin(), d.end(), 0.0);
    for (int x = 0; x < g.n(); ++x) vc[static_cast<std::size_t>(vk[static_cast<std::size_t>(x)])][static_cast<std::size_t>(sigma[static_cast<std::size_t>(x)])] += 1;
    for (int a = 0; a < g.m(); ++a) fc[static_cast<std::size_t>(fk[static_cast<std::size_t>(a)])][tuple_index(sigma, g, idx, a)] += 1;
    if (!within(vc, vtarget, vsize) || !within(fc, ftarget, fsize)) return;
    ++r.admitted;
    ls.add(lw);
  });
  r.log_z = ls.value();
  r.z = std::exp(r.log_z);
  return r;
}

EnhancedTypes enhanced_types(const FactorGraph& g, const LocalIndex& idx) {
  const Model& M = g.model();
  EnhancedTypes t;
  const int C = M.num_clones();
  t.var_class.assign(static_cast<std::size_t>(C), -1);
  t.factor_class.assign(static_cast<std::size_t>(C), -1);
  // the model clone type rides along: exchangeable-looking branches can still
  // carry different clone types (k-SAT signs)
  std::map<std::tuple<std::string, std::string, int>, int> ids;
  for (int c = 0; c < C; ++c) {
    auto [x, i] = M.var_clone_owner(c);
    auto [it, ins] = ids.try_emplace({idx.var_key[static_cast<std::size_t>(x)], idx.var_tokens[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)],
                                      M.var_clone_type(c)},
                                     static_cast<int>(ids.size()));
    t.var_class[static_cast<std::size_t>(c)] = it->second;
  }
  for (int f = 0; f < C; ++f) t.factor_class[static_cast<std::size_t>(f)] = t.var_class[static_cast<std::size_t>(g.var_clone_of(f))];
  t.num_types = static_cast<int>(ids.size());
  return t;
}

bool resampling_guarantee(const FactorGraph& g, int ell) { return is_l_acyclic(g, 100 * ell); }

FactorGraph resample_local_class(const FactorGraph& g, const EnhancedTypes& types, std::uint64_t seed) {
  return sample_matching(g.model_ptr(), types.var_class, types.factor_class, seed, "resample");
}

FactorGraph resample_local_class(const FactorGraph& g, int ell, std::uint64_t seed, bool strict) {
  if (strict && !resampling_guarantee(g, ell))
    throw std::invalid_argument("resample_local_class: graph is not " + std::to_string(100 * ell) + "-acyclic");
  return resample_local_class(g, enhanced_types(g, local_index(g, ell)), seed);
}

MomentEstimate conditional_first_moment(const FactorGraph& g, const RestrictionWindow& w, MomentMode mode,
                                        std::uint64_t samples, std::uint64_t seed, std::uint64_t cap, bool filter) {
  LocalIndex idx = local_index(g, w.ell);
  MomentEstimate e;
  e.seed = seed;
  if (mode == MomentMode::Formula) {
    const double r = ms3_residual(idx, w.q);
    if (r > 1e-8) throw std::invalid_argument("conditional_first_moment: q violates the balance condition (residual " + std::to_string(r) + ")");
    e.mode = "formula";
    e.value = g.n() * graph_bethe(idx, w.q);
    e.class_value = e.filtered_value = e.value;
    return e;
  }
  if (samples == 0) throw std::invalid_argument("conditional_first_moment: montecarlo needs samples > 0");
  e.mode = "montecarlo";
  e.samples = samples;
  e.filtered = filter;
  EnhancedTypes types = enhanced_types(g, idx);
  std::vector<double> logs;
  std::vector<char> acyc;
  for (std::uint64_t s = 0; s < samples; ++s) {
    FactorGraph h = resample_local_class(g, types, derive_seed(seed, "moment/resample", s));
    if (!in_local_class(idx, h)) continue;
    logs.push_back(restricted_partition(h, local_index(h, w.ell), w, cap).log_z);
    acyc.push_back(is_l_acyclic(h, 2 * w.ell + 5));
  }
  e.in_class = logs.size();
  e.acceptance_rate = static_cast<double>(logs.size()) / static_cast<double>(samples);
  const double ninf = -std::numeric_limits<double>::infinity();
  if (logs.empty()) {
    e.class_value = e.filtered_value = ninf;
    e.value = ninf;
    return e;
  }
  LogSum all, fil;
  std::size_t na = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    all.add(logs[i]);
    if (acyc[i]) {
      fil.add(logs[i]);
      ++na;
    }
  }
  const double k = static_cast<double>(logs.size());
  e.class_value = all.value() - std::log(k);
  e.filtered_value = fil.value() - std::log(k);
  e.acyclic_rate = na / k;
  e.value = filter ? e.filtered_value : e.class_value;
  // standard error of the mean, mapped to the log scale
  const double ref = filter ? e.filtered_value : e.class_value;
  if (std::isfinite(ref) && logs.size() > 1) {
    double s2 = 0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const double z = (filter && !acyc[i]) ? 0.0 : std::exp(logs[i] - ref);
      s2 += (z - 1) * (z - 1);
    }
    e.band = std::sqrt(s2 / (k - 1) / k);
  }
  return e;
}

JudiciousResult is_judicious(const FactorGraph& g, const std::vector<int>& sigma, const MarginalAssignment& p, double eps, int ell) {
  LocalIndex idx = local_index(g, ell);
  MarginalSequence emp = empirical_sequence(idx, g, sigma);
  MarginalSequence ref = sequence_from_assignment(idx, p);
  JudiciousResult r;
  for (const auto& [k, c] : idx.var_count) r.score += static_cast<double>(c) / idx.n * tv(emp.variables.at(k), ref.variables.at(k));
  for (const auto& [k, c] : idx.factor_count) {
    const auto& slots = idx.factor_slots.at(k);
    auto mg = joint_marginals(emp.factors.at(k), idx.q, static_cast<int>(slots.size()));
    double s = 0;
    for (std::size_t j = 0; j < slots.size(); ++j) s += tv(mg[j], ref.variables.at(slots[j]));
    r.score += static_cast<double>(c) / idx.m * s;
  }
  r.judicious = r.score < eps;
  return r;
}

namespace {

// Largest-remainder rounding of d * total to integers summing to total.
std::vector<long> round_counts(const Dist& d, long total, double& residual) {
  std::vector<long> c(d.size());
  std::vector<std::pair<double, std::size_t>> rem;
  long s = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d[i] * static_cast<double>(total);
    c[i] = static_cast<long>(std::floor(x + 1e-9));
    s += c[i];
    rem.emplace_back(-(x - static_cast<double>(c[i])), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t i = 0; s < total && i < rem.size(); ++i, ++s) ++c[rem[i].second];
  for (std::size_t i = 0; i < d.size(); ++i) residual = std::max(residual, std::fabs(d[i] - static_cast<double>(c[i]) / static_cast<double>(total)));
  return c;
}

}  // namespace

QValidCount count_q_valid_ratio(const FactorGraph& g, int ell, const MarginalSequence& q) {
  LocalIndex idx = local_index(g, ell);
  QValidCount r;
  r.rounded.depth = ell;
  r.rounded.q = idx.q;
  for (const auto& [k, c] : idx.var_count) {
    r.var_counts[k] = round_counts(lookup(q.variables, k, "variable"), c, r.rounding_residual);
    Dist d;
    for (long v : r.var_counts[k]) d.push_back(static_cast<double>(v) / c);
    r.rounded.variables[k] = d;
  }
  for (const auto& [k, c] : idx.factor_count) {
    r.factor_counts[k] = round_counts(lookup(q.factors, k, "constraint"), c, r.rounding_residual);
    Dist d;
    for (long v : r.factor_counts[k]) d.push_back(static_cast<double>(v) / c);
    r.rounded.factors[k] = d;
  }
  // per enhanced type (variable key, clone tag) and symbol, the clone
  // counts on both sides must agree
  std::map<std::pair<std::string, std::string>, std::vector<long>> balance;
  std::map<std::string, int> first;
  for (int x = 0; x < idx.n; ++x) first.try_emplace(idx.var_key[static_cast<std::size_t>(x)], x);
  for (const auto& [k, x] : first)
    for (const auto& tag : idx.var_tokens[static_cast<std::size_t>(x)]) {
      auto& b = balance[{k, tag}];
      b.resize(static_cast<std::size_t>(idx.q), 0);
      for (int w = 0; w < idx.q; ++w) b[static_cast<std::size_t>(w)] += r.var_counts[k][static_cast<std::size_t>(w)];
    }
  for (const auto& [k, slots] : idx.factor_slots) {
    const int h = static_cast<int>(slots.size());
    const auto& counts = r.factor_counts.at(k);
    for_each_assignment(idx.q, h, [&](std::size_t t, const std::vector<int>& s) {
      for (int j = 0; j < h; ++j)
        balance.at({slots[static_cast<std::size_t>(j)], idx.factor_slot_tag.at(k)[static_cast<std::size_t>(j)]})
               [static_cast<std::size_t>(s[static_cast<std::size_t>(j)])] -= counts[t];
    });
  }
  for (const auto& [type, b] : balance)
    for (int w = 0; w < idx.q; ++w)
      if (b[static_cast<std::size_t>(w)] != 0)
        throw Infeasible("no q-valid clone assignment: clone counts of type (" + type.first + ", " + type.second +
                         ") and symbol " + std::to_string(w) + " are off by " + std::to_string(b[static_cast<std::size_t>(w)]));
  r.value = g.n() * graph_bethe(idx, r.rounded);
  r.band = std::sqrt(static_cast<double>(g.n()));
  return r;
}

}  // namespace bethelab
