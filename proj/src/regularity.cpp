#include "bethelab/regularity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bethelab/errors.hpp"

namespace bethelab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Regular: return "regular";
    case Verdict::Irregular: return "irregular";
    default: return "unknown";
  }
}

namespace {

void check_eps(double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
}

// Law of sigma restricted to U, compressed to assignments of positive mass.
// For each such assignment, per-symbol bitmasks over positions of U.
struct Projection {
  int m = 0, q = 0;
  std::vector<double> weight;
  std::vector<std::uint64_t> masks;  // weight.size() * q
  std::vector<int> counts;           // weight.size() * q
};

Projection project(const DenseMeasure& mu, const Coords& U) {
  Projection p;
  p.m = static_cast<int>(U.size());
  p.q = mu.q();
  if (p.m > 64) throw std::invalid_argument("coordinate set too large for bitmask projection");
  const std::size_t tsize = checked_pow(p.q, p.m);
  std::vector<double> w(tsize, 0.0);
  for_each_assignment(mu.q(), mu.n(), [&](std::size_t idx, const std::vector<int>& s) {
    if (mu[idx] <= 0) return;
    std::size_t t = 0;
    for (int x : U) t = t * static_cast<std::size_t>(p.q) + static_cast<std::size_t>(s[static_cast<std::size_t>(x)]);
    w[t] += mu[idx];
  });
  std::vector<int> digits(static_cast<std::size_t>(p.m));
  for (std::size_t t = 0; t < tsize; ++t) {
    if (w[t] <= 0) continue;
    std::size_t r = t;
    for (int i = p.m - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<int>(r % static_cast<std::size_t>(p.q));
      r /= static_cast<std::size_t>(p.q);
    }
    p.weight.push_back(w[t]);
    std::size_t base = p.masks.size();
    p.masks.resize(base + static_cast<std::size_t>(p.q), 0);
    p.counts.resize(base + static_cast<std::size_t>(p.q), 0);
    for (int i = 0; i < p.m; ++i) {
      p.masks[base + static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])] |= std::uint64_t{1} << i;
      p.counts[base + static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])]++;
    }
  }
  return p;
}

double deviation(const Projection& p, std::uint64_t S) {
  const int s = std::popcount(S);
  const double inv_s = 1.0 / s, inv_m = 1.0 / p.m;
  double total = 0;
  for (std::size_t t = 0; t < p.weight.size(); ++t) {
    double d = 0;
    const std::size_t base = t * static_cast<std::size_t>(p.q);
    for (int w = 0; w < p.q; ++w)
      d += std::fabs(std::popcount(p.masks[base + static_cast<std::size_t>(w)] & S) * inv_s -
                     p.counts[base + static_cast<std::size_t>(w)] * inv_m);
    total += p.weight[t] * 0.5 * d;
  }
  return total;
}

Coords to_coords(const Coords& U, std::uint64_t S) {
  Coords c;
  for (int i = 0; i < static_cast<int>(U.size()); ++i)
    if (S >> i & 1) c.push_back(U[static_cast<std::size_t>(i)]);
  return c;
}

Coords sorted_unique(Coords U, int n) {
  std::sort(U.begin(), U.end());
  if (std::adjacent_find(U.begin(), U.end()) != U.end()) throw std::invalid_argument("repeated coordinate");
  for (int x : U)
    if (x < 0 || x >= n) throw std::invalid_argument("coordinate out of range");
  return U;
}

// Depth-first enumeration in lexicographic order of the sorted position lists.
struct LexSearch {
  const Projection& p;
  int minsize;
  double eps;
  std::uint64_t examined = 0;
  std::uint64_t found = 0;
  double found_value = 0;
  bool hit = false;

  void run(std::uint64_t prefix, int last, int size) {
    for (int next = last + 1; next < p.m && !hit; ++next) {
      std::uint64_t S = prefix | (std::uint64_t{1} << next);
      if (size + 1 >= minsize && size + 1 < p.m) {
        ++examined;
        double v = deviation(p, S);
        if (v >= eps) {
          hit = true;
          found = S;
          found_value = v;
          return;
        }
      }
      run(S, next, size + 1);
    }
  }
};

bool lex_less(const Coords& a, const Coords& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

int min_subset_size(double eps, std::size_t usize) {
  return std::max(1, static_cast<int>(std::ceil(eps * static_cast<double>(usize) - 1e-9)));
}

double subset_deviation(const DenseMeasure& mu, const Coords& U, const Coords& S) {
  if (S.empty() || U.empty()) throw std::invalid_argument("subset_deviation: empty set");
  Coords u = sorted_unique(U, mu.n());
  Coords s = sorted_unique(S, mu.n());
  double total = 0;
  for_each_assignment(mu.q(), mu.n(), [&](std::size_t idx, const std::vector<int>& sigma) {
    if (mu[idx] <= 0) return;
    total += mu[idx] * tv(empirical(sigma, s, mu.q()), empirical(sigma, u, mu.q()));
  });
  return total;
}

RegularityResult is_regular_on(const DenseMeasure& mu, const Coords& Uin, double eps,
                               const RegularityOptions& opt) {
  check_eps(eps);
  if (Uin.empty()) throw std::invalid_argument("regularity on empty coordinate set");
  const Coords U = sorted_unique(Uin, mu.n());
  const int m = static_cast<int>(U.size());
  const int minsize = min_subset_size(eps, U.size());
  bool exact = opt.strategy == RegularityStrategy::Exact ||
               (opt.strategy == RegularityStrategy::Auto && m <= opt.exact_cap);
  if (opt.strategy == RegularityStrategy::Exact && m > opt.exact_cap)
    throw BudgetExceeded("exact regularity check on |U|=" + std::to_string(m), std::uint64_t{1} << std::min(m, 63),
                         std::uint64_t{1} << opt.exact_cap);

  RegularityResult r;
  if (minsize >= m) {  // only S = U qualifies, and it has deviation 0
    r.verdict = Verdict::Regular;
    r.strategy = exact ? "exact" : "witness-search";
    return r;
  }
  const Projection p = project(mu, U);

  if (exact) {
    r.strategy = "exact";
    LexSearch search{p, minsize, eps};
    search.run(0, -1, 0);
    r.subsets_examined = search.examined;
    if (search.hit) {
      r.verdict = Verdict::Irregular;
      r.witness = to_coords(U, search.found);
      r.witness_value = search.found_value;
    } else {
      r.verdict = Verdict::Regular;
    }
    return r;
  }

  // One-sided candidates: for each symbol, the s positions where it is least /
  // most frequent under mu.
  r.strategy = "witness-search";
  std::vector<std::pair<Coords, double>> hits;
  for (int w = 0; w < p.q; ++w) {
    std::vector<double> freq(static_cast<std::size_t>(m), 0.0);
    for (std::size_t t = 0; t < p.weight.size(); ++t) {
      std::uint64_t mask = p.masks[t * static_cast<std::size_t>(p.q) + static_cast<std::size_t>(w)];
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1) freq[static_cast<std::size_t>(i)] += p.weight[t];
    }
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return freq[static_cast<std::size_t>(a)] < freq[static_cast<std::size_t>(b)]; });
    for (int s = minsize; s < m; ++s) {
      std::uint64_t low = 0, high = 0;
      for (int i = 0; i < s; ++i) {
        low |= std::uint64_t{1} << order[static_cast<std::size_t>(i)];
        high |= std::uint64_t{1} << order[static_cast<std::size_t>(m - 1 - i)];
      }
      for (std::uint64_t S : {low, high}) {
        ++r.subsets_examined;
        double v = deviation(p, S);
        if (v >= eps) hits.emplace_back(to_coords(U, S), v);
      }
    }
  }
  if (hits.empty()) {
    r.verdict = Verdict::Unknown;
    return r;
  }
  auto best = std::min_element(hits.begin(), hits.end(),
                               [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
  r.verdict = Verdict::Irregular;
  r.witness = best->first;
  r.witness_value = best->second;
  return r;
}

void validate_partition(const Partition& V, int n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int covered = 0;
  for (const Coords& c : V) {
    if (c.empty()) throw std::invalid_argument("partition has an empty class");
    for (int x : c) {
      if (x < 0 || x >= n) throw std::invalid_argument("partition coordinate out of range");
      if (seen[static_cast<std::size_t>(x)]++) throw std::invalid_argument("partition classes overlap");
      ++covered;
    }
  }
  if (covered != n) throw std::invalid_argument("partition does not cover all coordinates");
}

Partition canonical_partition(Partition V) {
  for (Coords& c : V) std::sort(c.begin(), c.end());
  std::sort(V.begin(), V.end(), [](const Coords& a, const Coords& b) { return a.front() < b.front(); });
  return V;
}

Partition trivial_partition(int n) {
  Coords all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  return {all};
}

Partition common_refinement(const Partition& a, const Partition& b, int n) {
  validate_partition(a, n);
  validate_partition(b, n);
  std::vector<int> la(static_cast<std::size_t>(n)), lb(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int x : a[i]) la[static_cast<std::size_t>(x)] = static_cast<int>(i);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (int x : b[i]) lb[static_cast<std::size_t>(x)] = static_cast<int>(i);
  std::map<std::pair<int, int>, Coords> groups;
  for (int x = 0; x < n; ++x) groups[{la[static_cast<std::size_t>(x)], lb[static_cast<std::size_t>(x)]}].push_back(x);
  Partition out;
  for (auto& [k, c] : groups) out.push_back(std::move(c));
  return canonical_partition(std::move(out));
}

PartitionRegularity regularity_wrt(const DenseMeasure& mu, const Partition& V, double eps,
                                   const RegularityOptions& opt) {
  check_eps(eps);
  validate_partition(V, mu.n());
  PartitionRegularity out;
  for (const Coords& c : V) {
    out.classes.push_back(is_regular_on(mu, c, eps, opt));
    if (out.classes.back().verdict == Verdict::Irregular) out.irregular_size += static_cast<int>(c.size());
    if (out.classes.back().verdict == Verdict::Unknown) out.unknown_size += static_cast<int>(c.size());
  }
  const double limit = eps * mu.n();
  if (out.irregular_size >= limit - 1e-12)
    out.verdict = Verdict::Irregular;
  else if (out.irregular_size + out.unknown_size >= limit - 1e-12)
    out.verdict = Verdict::Unknown;
  else
    out.verdict = Verdict::Regular;
  return out;
}

double index(const DenseMeasure& mu, const Partition& V) {
  validate_partition(V, mu.n());
  const int q = mu.q(), n = mu.n();
  std::vector<int> cls(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < V.size(); ++j)
    for (int x : V[j]) cls[static_cast<std::size_t>(x)] = static_cast<int>(j);
  std::vector<int> counts(V.size() * static_cast<std::size_t>(q));
  long double total = 0;
  for_each_assignment(q, n, [&](std::size_t idx, const std::vector<int>& s) {
    if (mu[idx] <= 0) return;
    std::fill(counts.begin(), counts.end(), 0);
    for (int x = 0; x < n; ++x)
      counts[static_cast<std::size_t>(cls[static_cast<std::size_t>(x)]) * static_cast<std::size_t>(q) +
             static_cast<std::size_t>(s[static_cast<std::size_t>(x)])]++;
    // sum over x in V_j of (1{s_x=w} - c_w/|V_j|)^2 = c_w - c_w^2/|V_j|
    double v = 0;
    for (std::size_t j = 0; j < V.size(); ++j) {
      const double size = static_cast<double>(V[j].size());
      for (int w = 0; w < q; ++w) {
        const double c = counts[j * static_cast<std::size_t>(q) + static_cast<std::size_t>(w)];
        v += c - c * c / size;
      }
    }
    total += mu[idx] * v;
  });
  return static_cast<double>(total / (static_cast<long double>(q) * n));
}

RefinementStep refine_irregular(const DenseMeasure& mu, const Partition& V, double eps,
                                const RegularityOptions& opt) {
  PartitionRegularity reg = regularity_wrt(mu, V, eps, opt);
  RefinementStep step;
  step.before = V;
  Partition out;
  for (std::size_t j = 0; j < V.size(); ++j) {
    const RegularityResult& r = reg.classes[j];
    if (r.verdict != Verdict::Irregular) {
      out.push_back(V[j]);
      continue;
    }
    step.split_classes.push_back(static_cast<int>(j));
    step.witnesses.push_back(r.witness);
    Coords rest;
    for (int x : V[j])
      if (!std::binary_search(r.witness.begin(), r.witness.end(), x)) rest.push_back(x);
    out.push_back(r.witness);
    out.push_back(rest);
  }
  if (step.split_classes.empty())
    throw InvalidState("refine_irregular: no class has an irregularity witness");
  step.after = canonical_partition(std::move(out));
  step.premise_held = reg.irregular_size >= eps * mu.n() - 1e-12;
  step.index_before = index(mu, V);
  step.index_after = index(mu, step.after);
  return step;
}

std::vector<StateClass> state_partition(const DenseMeasure& mu, const Partition& V, double eps) {
  check_eps(eps);
  validate_partition(V, mu.n());
  const int q = mu.q(), n = mu.n();
  const double pitch = eps / q;
  std::vector<int> cls(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < V.size(); ++j)
    for (int x : V[j]) cls[static_cast<std::size_t>(x)] = static_cast<int>(j);
  std::map<std::vector<int>, std::size_t> ids;
  std::vector<StateClass> states;
  std::vector<int> counts(V.size() * static_cast<std::size_t>(q));
  std::vector<int> cell(counts.size());
  std::vector<std::size_t> owner(mu.size());
  for_each_assignment(q, n, [&](std::size_t idx, const std::vector<int>& s) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int x = 0; x < n; ++x)
      counts[static_cast<std::size_t>(cls[static_cast<std::size_t>(x)]) * static_cast<std::size_t>(q) +
             static_cast<std::size_t>(s[static_cast<std::size_t>(x)])]++;
    for (std::size_t j = 0; j < V.size(); ++j)
      for (int w = 0; w < q; ++w) {
        std::size_t k = j * static_cast<std::size_t>(q) + static_cast<std::size_t>(w);
        cell[k] = static_cast<int>(std::floor(counts[k] / (static_cast<double>(V[j].size()) * pitch) + 1e-9));
      }
    auto [it, inserted] = ids.emplace(cell, states.size());
    if (inserted) {
      states.emplace_back();
      states.back().cell = cell;
    }
    owner[idx] = it->second;
  });
  for (StateClass& s : states) s.members.assign(mu.size(), 0);
  for (std::size_t idx = 0; idx < mu.size(); ++idx) {
    states[owner[idx]].members[idx] = 1;
    states[owner[idx]].mass += mu[idx];
  }
  std::sort(states.begin(), states.end(), [](const StateClass& a, const StateClass& b) { return a.cell < b.cell; });
  return states;
}

HomogeneityReport check_homogeneity(const DenseMeasure& mu, const Partition& V,
                                    const std::vector<AssignmentSet>& states,
                                    const std::vector<int>& I, double eps,
                                    const RegularityOptions& opt) {
  check_eps(eps);
  validate_partition(V, mu.n());
  const int q = mu.q();
  HomogeneityReport rep;
  rep.states = static_cast<int>(states.size());
  rep.states_in_I = static_cast<int>(I.size());

  // states must partition Omega^n
  std::vector<int> cover(mu.size(), 0);
  for (const AssignmentSet& s : states) {
    if (s.size() != mu.size()) throw std::invalid_argument("state indicator has wrong length");
    for (std::size_t i = 0; i < s.size(); ++i) cover[i] += s[i] ? 1 : 0;
  }
  for (int c : cover)
    if (c != 1) throw std::invalid_argument("states do not partition Omega^n");

  std::vector<char> inI(states.size(), 0);
  for (int i : I) {
    if (i < 0 || i >= static_cast<int>(states.size())) throw std::invalid_argument("I references unknown state");
    inI[static_cast<std::size_t>(i)] = 1;
  }

  // HM1
  rep.hm1 = true;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double m = mu.mass_of(states[i]);
    if (inI[i] && !(m > 0)) {
      rep.hm1 = false;
      rep.failures.push_back("HM1: state " + std::to_string(i) + " in I has zero mass");
    }
    if (!inI[i]) rep.excluded_mass += m;
  }
  if (!(rep.excluded_mass < eps)) {
    rep.hm1 = false;
    rep.failures.push_back("HM1: excluded mass " + std::to_string(rep.excluded_mass) + " >= eps");
  }

  // HM2: diameter of each state in every class, over all members
  rep.hm2 = true;
  {
    std::vector<std::size_t> owner(mu.size());
    for (std::size_t i = 0; i < states.size(); ++i)
      for (std::size_t idx = 0; idx < mu.size(); ++idx)
        if (states[i][idx]) owner[idx] = i;
    // per (state, class): distinct count vectors
    std::vector<std::map<std::vector<int>, char>> seen(states.size() * V.size());
    std::vector<int> c(static_cast<std::size_t>(q));
    for_each_assignment(q, mu.n(), [&](std::size_t idx, const std::vector<int>& s) {
      for (std::size_t j = 0; j < V.size(); ++j) {
        std::fill(c.begin(), c.end(), 0);
        for (int x : V[j]) c[static_cast<std::size_t>(s[static_cast<std::size_t>(x)])]++;
        seen[owner[idx] * V.size() + j].emplace(c, 0);
      }
    });
    for (std::size_t k = 0; k < seen.size(); ++k) {
      const double size = static_cast<double>(V[k % V.size()].size());
      std::vector<Dist> pts;
      for (const auto& [cv, unused] : seen[k]) {
        Dist d(static_cast<std::size_t>(q));
        for (int w = 0; w < q; ++w) d[static_cast<std::size_t>(w)] = cv[static_cast<std::size_t>(w)] / size;
        pts.push_back(std::move(d));
      }
      for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
          rep.max_state_diameter = std::max(rep.max_state_diameter, tv(pts[a], pts[b]));
    }
  }
  if (!(rep.max_state_diameter < eps)) {
    rep.hm2 = false;
    rep.failures.push_back("HM2: state diameter " + std::to_string(rep.max_state_diameter) + " >= eps");
  }

  // HM3
  rep.hm3 = true;
  for (int i : I) {
    const AssignmentSet& s = states[static_cast<std::size_t>(i)];
    if (!(mu.mass_of(s) > 0)) continue;  // already reported under HM1
    PartitionRegularity r = regularity_wrt(mu.conditional(s), V, eps, opt);
    if (r.verdict != Verdict::Regular) {
      rep.hm3 = false;
      rep.failures.push_back("HM3: conditional law of state " + std::to_string(i) + " is " + to_string(r.verdict));
    }
  }

  // HM4
  PartitionRegularity r = regularity_wrt(mu, V, eps, opt);
  rep.hm4 = r.verdict == Verdict::Regular;
  if (!rep.hm4) rep.failures.push_back(std::string("HM4: mu is ") + to_string(r.verdict) + " w.r.t. V");
  return rep;
}

std::uint64_t decomposition_iteration_bound(int q, double eps) {
  check_eps(eps);
  double b = std::ceil(4.0 * q * q * q / std::pow(eps, 5));
  if (b > 1e18) return UINT64_MAX;
  return static_cast<std::uint64_t>(b);
}

Decomposition decompose(const DenseMeasure& mu, const Partition& V0, double eps,
                        const RegularityOptions& opt) {
  check_eps(eps);
  validate_partition(V0, mu.n());
  const int q = mu.q();
  const double split_bound = std::pow(eps, 4) / (4.0 * q * q * q);
  Decomposition d;
  d.eps = eps;
  d.iteration_bound = decomposition_iteration_bound(q, eps);
  Partition V = canonical_partition(V0);

  for (;;) {
    if (static_cast<std::uint64_t>(++d.iterations) > d.iteration_bound)
      throw InternalError("decompose exceeded the index-decrement iteration bound");

    PartitionRegularity reg = regularity_wrt(mu, V, eps, opt);
    if (reg.verdict == Verdict::Irregular) {
      RefinementStep step = refine_irregular(mu, V, eps, opt);
      d.splits.push_back({d.iterations, "mu", step.index_before, step.index_after, split_bound, step.premise_held});
      V = step.after;
      continue;
    }

    std::vector<StateClass> states = state_partition(mu, V, eps);
    std::vector<int> I, bad;
    double bad_mass = 0;
    std::vector<DenseMeasure> conditionals;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!(states[i].mass > 0)) continue;
      DenseMeasure mi = mu.conditional(states[i].members);
      PartitionRegularity ri = regularity_wrt(mi, V, eps, opt);
      if (ri.verdict == Verdict::Regular) {
        I.push_back(static_cast<int>(i));
      } else if (ri.verdict == Verdict::Irregular) {
        bad.push_back(static_cast<int>(i));
        bad_mass += states[i].mass;
        conditionals.push_back(std::move(mi));
      }
    }

    if (bad_mass < eps || reg.verdict == Verdict::Unknown) {
      d.V = V;
      d.states = std::move(states);
      d.I = std::move(I);
      std::vector<AssignmentSet> sets;
      for (const StateClass& s : d.states) sets.push_back(s.members);
      d.report = check_homogeneity(mu, d.V, sets, d.I, eps, opt);
      return d;
    }

    Partition W = V;
    for (std::size_t k = 0; k < bad.size(); ++k) {
      RefinementStep step = refine_irregular(conditionals[k], V, eps, opt);
      d.splits.push_back({d.iterations, "state:" + std::to_string(bad[k]), step.index_before, step.index_after,
                          split_bound, step.premise_held});
      W = common_refinement(W, step.after, mu.n());
    }
    d.splits.push_back({d.iterations, "mu:state-driven", index(mu, V), index(mu, W),
                        eps * split_bound, true});
    V = W;
  }
}

}  // namespace bethelab
