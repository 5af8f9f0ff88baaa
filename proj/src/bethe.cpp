#include "bethelab/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "bethelab/partition.hpp"
#include "bethelab/rng.hpp"

namespace bethelab {

namespace {

void check_distribution(const Dist& d, int q, const char* what) {
  if (static_cast<int>(d.size()) != q) throw std::invalid_argument(std::string(what) + ": distribution has wrong size");
  double s = 0;
  for (double v : d) {
    if (!(v >= 0)) throw std::invalid_argument(std::string(what) + ": negative or NaN probability");
    s += v;
  }
  if (std::fabs(s - 1) > 1e-9) throw std::invalid_argument(std::string(what) + ": probabilities do not sum to 1");
}

void normalize(Dist& d) {
  double s = 0;
  for (double v : d) s += v;
  if (!(s > 0)) throw InternalError("normalize: zero vector");
  for (double& v : d) v /= s;
}

}  // namespace

std::vector<Dist> joint_marginals(const Dist& nu, int q, int arity) {
  std::vector<Dist> out(static_cast<std::size_t>(arity), Dist(static_cast<std::size_t>(q), 0.0));
  for_each_assignment(q, arity, [&](std::size_t idx, const std::vector<int>& s) {
    for (int j = 0; j < arity; ++j) out[static_cast<std::size_t>(j)][static_cast<std::size_t>(s[static_cast<std::size_t>(j)])] += nu[idx];
  });
  return out;
}

JointResult max_entropy_joint_ipf(const WeightFunction& psi, const std::vector<Dist>& marginals, double tol, int max_sweeps) {
  const int q = psi.q(), h = psi.arity();
  if (static_cast<int>(marginals.size()) != h) throw std::invalid_argument("max_entropy_joint: need one marginal per slot");
  for (const Dist& m : marginals) check_distribution(m, q, "max_entropy_joint");
  const std::size_t N = psi.table().size();
  JointResult r;
  r.joint.assign(N, 0.0);
  std::vector<std::vector<int>> tuples(N);
  for_each_assignment(q, h, [&](std::size_t idx, const std::vector<int>& s) {
    tuples[idx] = s;
    double w = psi.at(idx);
    for (int j = 0; j < h; ++j) w *= marginals[static_cast<std::size_t>(j)][static_cast<std::size_t>(s[static_cast<std::size_t>(j)])];
    r.joint[idx] = w;
  });
  normalize(r.joint);
  auto residual = [&] {
    double res = 0;
    auto mg = joint_marginals(r.joint, q, h);
    for (int j = 0; j < h; ++j)
      for (int w = 0; w < q; ++w)
        res = std::max(res, std::fabs(mg[static_cast<std::size_t>(j)][static_cast<std::size_t>(w)] -
                                      marginals[static_cast<std::size_t>(j)][static_cast<std::size_t>(w)]));
    return res;
  };
  r.residual = residual();
  while (r.residual >= tol) {
    if (r.sweeps >= max_sweeps) throw NotConverged("max_entropy_joint: IPF hit the sweep cap", r.residual);
    for (int j = 0; j < h; ++j) {
      Dist cur(static_cast<std::size_t>(q), 0.0);
      for (std::size_t i = 0; i < N; ++i) cur[static_cast<std::size_t>(tuples[i][static_cast<std::size_t>(j)])] += r.joint[i];
      for (std::size_t i = 0; i < N; ++i) {
        const int w = tuples[i][static_cast<std::size_t>(j)];
        const double c = cur[static_cast<std::size_t>(w)];
        r.joint[i] = c > 0 ? r.joint[i] * marginals[static_cast<std::size_t>(j)][static_cast<std::size_t>(w)] / c : 0.0;
      }
    }
    ++r.sweeps;
    r.residual = residual();
  }
  return r;
}

Dist max_entropy_joint(const WeightFunction& psi, const std::vector<Dist>& marginals) {
  return max_entropy_joint_ipf(psi, marginals).joint;
}

double constraint_objective(const WeightFunction& psi, const Dist& nu) {
  if (nu.size() != psi.table().size()) throw std::invalid_argument("constraint_objective: size mismatch");
  double s = entropy(nu);
  for (std::size_t i = 0; i < nu.size(); ++i) s += nu[i] * psi.log_at(i);
  return s;
}

Dist tree_root_marginal(const Template& t, const Clamp& clamp) {
  if (!t.is_tree()) throw std::invalid_argument("tree_root_marginal: template is not a tree");
  if (t.root_is_factor()) throw std::invalid_argument("tree_root_marginal: root must be a variable");
  if (!clamp.empty() && clamp.size() != t.nodes.size()) throw std::invalid_argument("tree_root_marginal: clamp has wrong size");
  const int q = t.q;
  auto clamped = [&](int u) { return clamp.empty() ? -1 : clamp[static_cast<std::size_t>(u)]; };
  for (std::size_t u = 0; u < clamp.size(); ++u)
    if (clamp[u] >= 0 && t.nodes[u].factor) throw std::invalid_argument("tree_root_marginal: only variables can be clamped");

  std::function<Dist(int, int)> var_belief, factor_msg;
  // belief of variable u excluding the constraint on parent_slot
  var_belief = [&](int u, int parent_slot) {
    const TemplateNode& v = t.nodes[static_cast<std::size_t>(u)];
    Dist b(static_cast<std::size_t>(q), 1.0);
    if (int c = clamped(u); c >= 0) {
      if (c >= q) throw std::invalid_argument("tree_root_marginal: clamp symbol out of range");
      std::fill(b.begin(), b.end(), 0.0);
      b[static_cast<std::size_t>(c)] = 1.0;
    }
    for (std::size_t s = 0; s < v.adj.size(); ++s) {
      if (static_cast<int>(s) == parent_slot || v.adj[s].first < 0) continue;
      Dist msg = factor_msg(v.adj[s].first, v.adj[s].second);
      for (int w = 0; w < q; ++w) b[static_cast<std::size_t>(w)] *= msg[static_cast<std::size_t>(w)];
    }
    normalize(b);
    return b;
  };
  // message from constraint a to the variable on its slot p
  factor_msg = [&](int a, int p) {
    const TemplateNode& f = t.nodes[static_cast<std::size_t>(a)];
    const int h = static_cast<int>(f.adj.size());
    std::vector<Dist> in(static_cast<std::size_t>(h));
    for (int s = 0; s < h; ++s) {
      if (s == p) continue;
      auto [w, ws] = f.adj[static_cast<std::size_t>(s)];
      in[static_cast<std::size_t>(s)] = w >= 0 ? var_belief(w, ws) : Dist(static_cast<std::size_t>(q), 1.0);
    }
    Dist out(static_cast<std::size_t>(q), 0.0);
    for_each_assignment(q, h, [&](std::size_t idx, const std::vector<int>& s) {
      double v = f.weight->at(idx);
      for (int j = 0; j < h; ++j)
        if (j != p) v *= in[static_cast<std::size_t>(j)][static_cast<std::size_t>(s[static_cast<std::size_t>(j)])];
      out[static_cast<std::size_t>(s[static_cast<std::size_t>(p)])] += v;
    });
    normalize(out);
    return out;
  };
  return var_belief(t.root, -1);
}

const Dist& MarginalAssignment::variable(const std::string& key) const {
  auto it = variables.find(key);
  if (it == variables.end()) throw std::out_of_range("marginal assignment has no variable key " + key);
  return it->second;
}

const Dist& MarginalAssignment::factor(const std::string& key) const {
  auto it = factors.find(key);
  if (it == factors.end()) throw std::out_of_range("marginal assignment has no constraint key " + key);
  return it->second;
}

namespace {

std::vector<std::string> slot_keys(const Template& factor_t, int ell) {
  std::vector<std::string> out;
  // canonical slot order, so joints are comparable across representatives
  for (int j : key_info(factor_t).canon) out.push_back(canonical_key(truncate(reroot(factor_t, j), ell)));
  return out;
}

void fill_factor_joints(MarginalAssignment& p, const std::map<std::string, Template>& reps) {
  for (const auto& [key, tf] : reps) {
    const auto& slots = p.factor_slots.at(key);
    std::vector<Dist> margs;
    for (const auto& s : slots) margs.push_back(p.variable(s));
    p.factors[key] = max_entropy_joint(*tf.nodes[static_cast<std::size_t>(tf.root)].weight, margs);
  }
}

}  // namespace

MarginalAssignment build_marginal_assignment(const LocalDistribution& theta_ext, int ell, int m) {
  if (ell < 0 || m < 0) throw std::invalid_argument("build_marginal_assignment: negative depth");
  if (theta_ext.depth != ell + m)
    throw std::invalid_argument("build_marginal_assignment: needs limit data at depth " + std::to_string(ell + m) +
                                ", got depth " + std::to_string(theta_ext.depth));
  MarginalAssignment p;
  p.depth = ell;
  p.extension = m;
  std::map<std::string, double> wsum;
  std::map<std::string, Template> reps;
  for (const auto& [key, e] : theta_ext.entries) {
    const Template& t = e.representative;
    if (!t.is_tree()) throw std::invalid_argument("build_marginal_assignment: limit data contains a non-tree template");
    p.q = t.q;
    if (t.root_is_factor()) continue;
    std::string kv = canonical_key(truncate(t, ell));
    Dist r = tree_root_marginal(t);
    auto [it, ins] = p.variables.try_emplace(kv, Dist(r.size(), 0.0));
    for (std::size_t w = 0; w < r.size(); ++w) it->second[w] += e.weight * r[w];
    wsum[kv] += e.weight;
  }
  // Sampled limits can miss a variable key that only shows up behind a
  // constraint slot. Those get the average over the slot occurrences instead.
  std::map<std::string, Dist> extra;
  std::map<std::string, double> extra_w;
  for (const auto& [key, e] : theta_ext.entries) {
    const Template& t = e.representative;
    if (!t.root_is_factor()) continue;
    Template tf = truncate(t, ell + 1);
    std::string kf = canonical_key(tf);
    auto [fit, fresh] = p.factor_slots.try_emplace(kf);
    if (fresh) fit->second = slot_keys(tf, ell);
    const auto& slots = fit->second;
    const auto canon = key_info(tf).canon;
    for (std::size_t c = 0; c < slots.size(); ++c) {
      if (wsum.count(slots[c])) continue;
      Dist r = tree_root_marginal(truncate(reroot(t, canon[c]), ell + m));
      auto [it, ins] = extra.try_emplace(slots[c], Dist(r.size(), 0.0));
      for (std::size_t w = 0; w < r.size(); ++w) it->second[w] += e.weight * r[w];
      extra_w[slots[c]] += e.weight;
    }
    if (fresh) reps.emplace(kf, std::move(tf));
  }
  for (auto& [k, d] : p.variables) {
    if (!(wsum[k] > 0)) throw InternalError("build_marginal_assignment: key without mass");
    for (double& v : d) v /= wsum[k];
  }
  for (auto& [k, d] : extra) {
    for (double& v : d) v /= extra_w[k];
    p.variables.emplace(k, std::move(d));
  }
  fill_factor_joints(p, reps);
  return p;
}

MarginalAssignment build_marginal_assignment_auto(const BranchingLaw& law, int ell, int m_max, double tol, const LimitOptions& opt) {
  if (m_max < 1) throw std::invalid_argument("build_marginal_assignment_auto: m_max must be >= 1");
  MarginalAssignment prev;
  for (int m = 1; m <= m_max; ++m) {
    MarginalAssignment cur = build_marginal_assignment(limit_tree(law, ell + m, opt), ell, m);
    if (m > 1) {
      double gap = 0;
      for (const auto& [k, d] : cur.variables) {
        auto it = prev.variables.find(k);
        gap = std::max(gap, it == prev.variables.end() ? 1.0 : tv(d, it->second));
      }
      cur.fixed_point_gap = gap;
      if (gap < tol) {
        cur.fixed_point = true;
        return cur;
      }
    }
    prev = std::move(cur);
  }
  return prev;
}

double ma2_residual(const MarginalAssignment& p) {
  double r = 0;
  for (const auto& [key, joint] : p.factors) {
    const auto& slots = p.factor_slots.at(key);
    auto mg = joint_marginals(joint, p.q, static_cast<int>(slots.size()));
    for (std::size_t j = 0; j < slots.size(); ++j) r = std::max(r, tv(mg[j], p.variable(slots[j])));
  }
  return r;
}

MarginalAssignment uniform_assignment(const LocalDistribution& theta) {
  MarginalAssignment p;
  p.depth = theta.depth;
  std::map<std::string, Template> reps;
  for (const auto& [key, e] : theta.entries) {
    p.q = e.representative.q;
    if (e.representative.root_is_factor()) {
      const Template& tf = e.representative;
      std::vector<Dist> margs(static_cast<std::size_t>(tf.root_degree()), uniform_distribution(tf.q));
      p.factors[key] = max_entropy_joint(*tf.nodes[static_cast<std::size_t>(tf.root)].weight, margs);
      if (tf.is_tree()) p.factor_slots[key] = slot_keys(tf, theta.depth);
    } else {
      p.variables[key] = uniform_distribution(e.representative.q);
    }
  }
  // drop slot lists pointing at keys outside theta
  for (auto it = p.factor_slots.begin(); it != p.factor_slots.end();) {
    bool ok = true;
    for (const auto& s : it->second) ok = ok && p.variables.count(s);
    it = ok ? std::next(it) : p.factor_slots.erase(it);
  }
  return p;
}

double bethe_free_energy(const LocalDistribution& theta, const MarginalAssignment& p) {
  double pv = 0, var_part = 0, fac_part = 0;
  for (const auto& [key, e] : theta.entries) {
    const Template& t = e.representative;
    if (t.root_is_factor()) {
      const Dist& nu = p.factor(key);
      fac_part += e.weight * constraint_objective(*t.nodes[static_cast<std::size_t>(t.root)].weight, nu);
    } else {
      pv += e.weight;
      var_part += e.weight * (1.0 - t.root_degree()) * entropy(p.variable(key));
    }
  }
  if (!(pv > 0)) throw std::invalid_argument("bethe_free_energy: no variable mass");
  return (var_part + fac_part) / pv;
}

const char* to_string(UniquenessVerdict v) {
  switch (v) {
    case UniquenessVerdict::Unique: return "unique";
    case UniquenessVerdict::NotUnique: return "not-unique";
    default: return "unknown";
  }
}

UniquenessResult gibbs_uniqueness_check(const Template& t, const MarginalAssignment& p, double eps, int ell,
                                        const UniquenessOptions& opt) {
  if (t.root_is_factor()) throw std::invalid_argument("gibbs_uniqueness_check: root must be a variable");
  if (ell < 0 || t.depth < ell || t.depth < p.depth) throw std::invalid_argument("gibbs_uniqueness_check: template too shallow");
  const Dist& target = p.variable(canonical_key(truncate(t, p.depth)));
  Template tt = truncate(t, ell);
  if (!tt.is_tree()) throw std::invalid_argument("gibbs_uniqueness_check: template is not a tree");
  UniquenessResult r;
  auto d = tt.distances();
  for (std::size_t u = 0; u < tt.nodes.size(); ++u)
    if (d[u] == 2 * ell) r.boundary_nodes.push_back(static_cast<int>(u));
  const int B = static_cast<int>(r.boundary_nodes.size()), q = tt.q;
  if (opt.mode == UniquenessMode::Exhaustive && B > opt.cap)
    throw BudgetExceeded("exhaustive boundary enumeration (boundary variables)", static_cast<std::uint64_t>(B),
                         static_cast<std::uint64_t>(opt.cap));
  Clamp clamp(tt.nodes.size(), -1);
  r.worst_tv = -1;
  auto eval = [&](const std::vector<int>& bc) {
    for (int i = 0; i < B; ++i) clamp[static_cast<std::size_t>(r.boundary_nodes[static_cast<std::size_t>(i)])] = bc[static_cast<std::size_t>(i)];
    const double v = tv(tree_root_marginal(tt, clamp), target);
    ++r.boundaries_checked;
    if (v > r.worst_tv) {
      r.worst_tv = v;
      r.worst_boundary = bc;
    }
  };
  auto is_constant = [](const std::vector<int>& bc) {
    return std::all_of(bc.begin(), bc.end(), [&](int v) { return v == bc.front(); });
  };
  // constant boundaries first, highest symbol first (all-(+1) for spins)
  for (int w = q - 1; w >= 0; --w) eval(std::vector<int>(static_cast<std::size_t>(B), w));
  if (opt.mode == UniquenessMode::Exhaustive) {
    if (B > 1)
      for_each_assignment(q, B, [&](std::size_t, const std::vector<int>& bc) {
        if (!is_constant(bc)) eval(bc);
      });
    r.verdict = r.worst_tv < eps ? UniquenessVerdict::Unique : UniquenessVerdict::NotUnique;
  } else {
    Rng rng(opt.seed, "uniqueness/boundary");
    std::vector<int> bc(static_cast<std::size_t>(B));
    for (std::uint64_t s = 0; s < opt.samples; ++s) {
      for (int& v : bc) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(q)));
      eval(bc);
    }
    r.verdict = r.worst_tv < eps ? UniquenessVerdict::Unknown : UniquenessVerdict::NotUnique;
  }
  return r;
}

double nonreconstruction_estimate(const FactorGraph& g, const MarginalAssignment& p, int ell, std::uint64_t samples,
                                  std::uint64_t seed, std::uint64_t cap) {
  if (p.depth != ell) throw std::invalid_argument("nonreconstruction_estimate: marginal assignment depth differs from ell");
  const Model& M = g.model();
  const int n = M.n(), q = M.q();
  EnumerationOptions eo;
  eo.cap = cap;
  DenseMeasure mu = gibbs(g, eo);
  const std::size_t N = mu.size();

  std::vector<std::size_t> draws;
  if (samples > 0) {
    std::vector<double> cdf(N);
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) cdf[i] = (acc += mu[i]);
    Rng rng(seed, "nonrecon/boundary");
    for (std::uint64_t s = 0; s < samples; ++s) {
      const double u = rng.uniform() * acc;
      draws.push_back(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()));
      if (draws.back() >= N) draws.back() = N - 1;
    }
  }

  double total = 0;
  for (int x = 0; x < n; ++x) {
    Template tx = variable_neighborhood(g, x, ell);
    const std::string key = canonical_key(tx);
    Dist target;
    if (auto it = p.variables.find(key); it != p.variables.end())
      target = it->second;
    else if (!tx.is_tree())
      target = uniform_distribution(q);
    else
      throw std::out_of_range("marginal assignment has no variable key " + key);

    // bipartite distances from x
    std::vector<int> dv(static_cast<std::size_t>(n), -1), df(static_cast<std::size_t>(M.m()), -1);
    std::deque<std::pair<bool, int>> queue{{false, x}};
    dv[static_cast<std::size_t>(x)] = 0;
    while (!queue.empty()) {
      auto [isf, u] = queue.front();
      queue.pop_front();
      if (isf) {
        for (int j = 0; j < M.factor_degree(u); ++j) {
          int y = g.var_at(u, j);
          if (dv[static_cast<std::size_t>(y)] < 0) {
            dv[static_cast<std::size_t>(y)] = df[static_cast<std::size_t>(u)] + 1;
            queue.push_back({false, y});
          }
        }
      } else {
        for (int i = 0; i < M.var_degree(u); ++i) {
          int a = g.factor_neighbor(u, i).first;
          if (df[static_cast<std::size_t>(a)] < 0) {
            df[static_cast<std::size_t>(a)] = dv[static_cast<std::size_t>(u)] + 1;
            queue.push_back({true, a});
          }
        }
      }
    }
    std::vector<std::size_t> place(static_cast<std::size_t>(n), 0);
    std::size_t stride = 1;
    for (int y = n - 1; y >= 0; --y) {
      const int dy = dv[static_cast<std::size_t>(y)];
      if (dy < 0 || dy >= 2 * ell) {
        place[static_cast<std::size_t>(y)] = stride;
        stride *= static_cast<std::size_t>(q);
      }
    }
    std::unordered_map<std::size_t, Dist> buckets;
    std::vector<std::size_t> bucket_of(N);
    for_each_assignment(q, n, [&](std::size_t idx, const std::vector<int>& s) {
      std::size_t b = 0;
      for (int y = 0; y < n; ++y) b += place[static_cast<std::size_t>(y)] * static_cast<std::size_t>(s[static_cast<std::size_t>(y)]);
      bucket_of[idx] = b;
      auto [it, ins] = buckets.try_emplace(b, Dist(static_cast<std::size_t>(q), 0.0));
      it->second[static_cast<std::size_t>(s[static_cast<std::size_t>(x)])] += mu[idx];
    });
    std::unordered_map<std::size_t, double> score;
    for (auto& [b, d] : buckets) {
      double s = 0;
      for (double v : d) s += v;
      if (!(s > 0)) continue;
      Dist c = d;
      for (double& v : c) v /= s;
      score[b] = tv(c, target);
      if (samples == 0) total += s * score[b];
    }
    if (samples > 0) {
      double acc = 0;
      for (std::size_t idx : draws) acc += score[bucket_of[idx]];
      total += acc / static_cast<double>(samples);
    }
  }
  return total / n;
}

}  // namespace bethelab
