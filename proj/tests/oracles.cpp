#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

double ising_cycle_z(int n, double beta) {
  using M2 = std::array<std::array<double, 2>, 2>;
  auto mul = [](const M2& a, const M2& b) {
    M2 c{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
  };
  M2 t{{{std::exp(beta), std::exp(-beta)}, {std::exp(-beta), std::exp(beta)}}};
  M2 r{{{1, 0}, {0, 1}}};
  for (int i = 0; i < n; ++i) r = mul(r, t);
  return r[0][0] + r[1][1];
}

long double brute_z(const FactorGraph& g) {
  const Model& M = g.model();
  const int n = M.n(), q = M.q();
  std::vector<int> s(static_cast<std::size_t>(n), 0);
  long double z = 0;
  while (true) {
    long double w = 1;
    for (int a = 0; a < M.m(); ++a) {
      std::size_t idx = 0;
      for (int j = 0; j < M.factor_degree(a); ++j) idx = idx * static_cast<std::size_t>(q) + static_cast<std::size_t>(s[static_cast<std::size_t>(g.var_at(a, j))]);
      w *= M.weight_of(a).table()[idx];
    }
    z += w;
    int x = 0;
    while (x < n && ++s[static_cast<std::size_t>(x)] == q) s[static_cast<std::size_t>(x++)] = 0;
    if (x == n) break;
  }
  return z;
}

double brute_log_z(const FactorGraph& g) { return static_cast<double>(std::log(brute_z(g))); }

double naive_index(const DenseMeasure& mu, const Partition& V) {
  const int q = mu.q(), n = mu.n();
  double total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    std::vector<int> s = mu.decode(i);
    for (int w = 0; w < q; ++w)
      for (const auto& cls : V) {
        double frac = 0;
        for (int y : cls) frac += s[static_cast<std::size_t>(y)] == w;
        frac /= static_cast<double>(cls.size());
        for (int x : cls) {
          const double dev = (s[static_cast<std::size_t>(x)] == w ? 1.0 : 0.0) - frac;
          total += mu[i] * dev * dev;
        }
      }
  }
  return total / (q * n);
}

double naive_subset_deviation(const DenseMeasure& mu, const Coords& U, const Coords& S) {
  double total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    std::vector<int> s = mu.decode(i);
    double d = 0;
    for (int w = 0; w < mu.q(); ++w) {
      double a = 0, b = 0;
      for (int x : S) a += s[static_cast<std::size_t>(x)] == w;
      for (int x : U) b += s[static_cast<std::size_t>(x)] == w;
      d += std::fabs(a / static_cast<double>(S.size()) - b / static_cast<double>(U.size()));
    }
    total += mu[i] * d / 2;
  }
  return total;
}

Dist brute_tree_marginal(const Template& t, const Clamp& clamp) {
  std::vector<int> vars;
  std::vector<int> slot(t.nodes.size(), -1);
  for (std::size_t u = 0; u < t.nodes.size(); ++u)
    if (!t.nodes[u].factor) {
      slot[u] = static_cast<int>(vars.size());
      vars.push_back(static_cast<int>(u));
    }
  const int q = t.q;
  Dist out(static_cast<std::size_t>(q), 0.0);
  std::vector<int> s(vars.size(), 0);
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto u = static_cast<std::size_t>(vars[i]);
      if (!clamp.empty() && clamp[u] >= 0 && clamp[u] != s[i]) ok = false;
    }
    if (ok) {
      double w = 1;
      for (const TemplateNode& v : t.nodes) {
        if (!v.factor) continue;
        std::vector<int> args;
        for (auto [nb, ns] : v.adj) args.push_back(s[static_cast<std::size_t>(slot[static_cast<std::size_t>(nb)])]);
        w *= v.weight->table()[v.weight->index_of(args)];
      }
      out[static_cast<std::size_t>(s[static_cast<std::size_t>(slot[static_cast<std::size_t>(t.root)])])] += w;
    }
    std::size_t i = 0;
    while (i < s.size() && ++s[i] == q) s[i++] = 0;
    if (i == s.size()) break;
  }
  const double z = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= z;
  return out;
}

Dist golden_max_entropy(const WeightFunction& psi, const Dist& m0, const Dist& m1) {
  if (psi.q() != 2 || psi.arity() != 2) throw std::invalid_argument("golden_max_entropy: pairwise binary only");
  auto joint = [&](double t) { return Dist{t, m0[0] - t, m1[0] - t, 1 - m0[0] - m1[0] + t}; };
  auto f = [&](double t) {
    Dist j = joint(t);
    double v = 0;
    for (std::size_t i = 0; i < 4; ++i)
      if (j[i] > 0) v += -j[i] * std::log(j[i]) + j[i] * std::log(psi.table()[i]);
    return v;
  };
  double lo = std::max(0.0, m0[0] + m1[0] - 1), hi = std::min(m0[0], m1[0]);
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (f(a) < f(b))
      lo = a;
    else
      hi = b;
  }
  // already (slot0, slot1) lexicographic
  return joint((lo + hi) / 2);
}

std::vector<int> cycle_type(const FactorGraph& g) {
  const Model& M = g.model();
  std::vector<char> seen(static_cast<std::size_t>(M.m()), 0);
  std::vector<int> out;
  for (int a0 = 0; a0 < M.m(); ++a0) {
    if (seen[static_cast<std::size_t>(a0)]) continue;
    int len = 0;
    std::vector<int> stack{a0};
    seen[static_cast<std::size_t>(a0)] = 1;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      ++len;
      for (int j = 0; j < 2; ++j) {
        const int x = g.var_at(a, j);
        for (int i = 0; i < 2; ++i) {
          const int b = g.factor_neighbor(x, i).first;
          if (!seen[static_cast<std::size_t>(b)]) {
            seen[static_cast<std::size_t>(b)] = 1;
            stack.push_back(b);
          }
        }
      }
    }
    out.push_back(len);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::vector<int>, double> uniform_cycle_type_law(int n) {
  std::map<std::vector<int>, double> law;
  // fresh: variables not yet visited; len: constraints on the open cycle
  std::function<void(int, int, std::vector<int>, double)> walk = [&](int fresh, int len, std::vector<int> done, double p) {
    // the open cycle's last variable clone picks a constraint (all fresh
    // constraints are alike), whose other slot picks a variable clone: the
    // home clone closes the cycle, otherwise one of 2*fresh fresh clones
    const double close = 1.0 / (1.0 + 2.0 * fresh);
    {
      std::vector<int> d = done;
      d.push_back(len + 1);
      if (fresh == 0) {
        std::sort(d.begin(), d.end());
        law[d] += p;
      } else {
        // start a new cycle at a fresh variable
        walk(fresh - 1, 0, d, p * close);
      }
    }
    if (fresh > 0) walk(fresh - 1, len + 1, done, p * (1 - close));
  };
  if (n < 1) throw std::invalid_argument("uniform_cycle_type_law: n >= 1");
  walk(n - 1, 0, {}, 1.0);
  return law;
}

std::map<std::vector<int>, std::uint64_t> enumerate_cycle_types(int n) {
  ModelPtr m = ising(n, 2, 0.0);
  std::vector<int> perm(static_cast<std::size_t>(2 * n));
  std::iota(perm.begin(), perm.end(), 0);
  std::map<std::vector<int>, std::uint64_t> out;
  do {
    out[cycle_type(FactorGraph(m, perm))]++;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

double ising_cycle_union_z(const std::vector<int>& type, double beta) {
  double z = 1;
  for (int len : type) z *= ising_cycle_z(len, beta);
  return z;
}

std::map<std::vector<int>, double> planted_cycle_type_law(int n, double beta) {
  // at depth 0 the class of a graph is its set of self-loop constraints; the
  // rest is a uniform loop-free matching, reweighted by Z within the class
  auto law_n = uniform_cycle_type_law(n);
  std::map<int, double> loops;
  for (const auto& [t, p] : law_n) loops[static_cast<int>(std::count(t.begin(), t.end(), 1))] += p;
  std::map<std::vector<int>, double> out;
  for (const auto& [k, pk] : loops) {
    const int rest = n - k;
    std::map<std::vector<int>, double> inner;
    if (rest == 0) {
      inner[{}] = 1;
    } else {
      for (const auto& [t, p] : uniform_cycle_type_law(rest))
        if (std::count(t.begin(), t.end(), 1) == 0) inner[t] = p * ising_cycle_union_z(t, beta);
    }
    double norm = 0;
    for (const auto& [t, w] : inner) norm += w;
    for (const auto& [t, w] : inner) {
      std::vector<int> full(static_cast<std::size_t>(k), 1);
      full.insert(full.end(), t.begin(), t.end());
      std::sort(full.begin(), full.end());
      out[full] += pk * w / norm;
    }
  }
  return out;
}

double filtered_log_z(const FactorGraph& g, const LocalIndex& idx, const MarginalSequence& q, double delta) {
  const Model& M = g.model();
  const int n = M.n(), Q = M.q();
  long double z = 0;
  std::vector<int> s(static_cast<std::size_t>(n), 0);
  while (true) {
    std::map<std::string, Dist> vc, fc;
    for (const auto& [k, d] : q.variables) vc[k].assign(d.size(), 0.0);
    for (const auto& [k, d] : q.factors) fc[k].assign(d.size(), 0.0);
    for (int x = 0; x < n; ++x) vc.at(idx.var_key[static_cast<std::size_t>(x)])[static_cast<std::size_t>(s[static_cast<std::size_t>(x)])] += 1.0 / idx.var_count.at(idx.var_key[static_cast<std::size_t>(x)]);
    long double w = 1;
    for (int a = 0; a < M.m(); ++a) {
      std::size_t t = 0;
      for (int j = 0; j < M.factor_degree(a); ++j) t = t * static_cast<std::size_t>(Q) + static_cast<std::size_t>(s[static_cast<std::size_t>(g.var_at(a, j))]);
      const std::string& k = idx.factor_key[static_cast<std::size_t>(a)];
      fc.at(k)[t] += 1.0 / idx.factor_count.at(k);
      w *= M.weight_of(a).table()[t];
    }
    bool keep = true;
    for (const auto& [k, d] : vc) {
      double l1 = 0;
      for (std::size_t i = 0; i < d.size(); ++i) l1 += std::fabs(d[i] - q.variables.at(k)[i]);
      keep = keep && l1 / 2 <= delta + 1e-12;
    }
    for (const auto& [k, d] : fc) {
      double l1 = 0;
      for (std::size_t i = 0; i < d.size(); ++i) l1 += std::fabs(d[i] - q.factors.at(k)[i]);
      keep = keep && l1 / 2 <= delta + 1e-12;
    }
    if (keep) z += w;
    int x = 0;
    while (x < n && ++s[static_cast<std::size_t>(x)] == Q) s[static_cast<std::size_t>(x++)] = 0;
    if (x == n) break;
  }
  return static_cast<double>(std::log(z));
}

double q_valid_log_ratio(const FactorGraph& g, const LocalIndex& idx, const std::map<std::string, std::vector<long>>& var_counts,
                         const std::map<std::string, std::vector<long>>& factor_counts) {
  const Model& M = g.model();
  const int n = M.n(), Q = M.q(), C = M.num_clones();
  auto lfact = [](long k) { return std::lgamma(static_cast<double>(k) + 1); };
  // enhanced type of every variable clone
  std::map<std::tuple<std::string, std::string, int>, int> ids;
  std::vector<int> vtype(static_cast<std::size_t>(C)), ftype(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    auto [x, i] = M.var_clone_owner(c);
    auto key = std::make_tuple(idx.var_key[static_cast<std::size_t>(x)], idx.var_tokens[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)],
                               M.var_clone_type(c));
    vtype[static_cast<std::size_t>(c)] = ids.try_emplace(key, static_cast<int>(ids.size())).first->second;
  }
  for (int f = 0; f < C; ++f) ftype[static_cast<std::size_t>(f)] = vtype[static_cast<std::size_t>(g.var_clone_of(f))];
  const int T = static_cast<int>(ids.size());
  std::vector<long> type_size(static_cast<std::size_t>(T), 0);
  for (int c = 0; c < C; ++c) type_size[static_cast<std::size_t>(vtype[static_cast<std::size_t>(c)])]++;
  double log_all = 0;
  for (long s : type_size) log_all += lfact(s);

  std::vector<double> terms;
  std::vector<int> sv(static_cast<std::size_t>(n), 0), sf(static_cast<std::size_t>(C), 0);
  auto bump = [&](std::vector<int>& v) {
    std::size_t i = 0;
    while (i < v.size() && ++v[i] == Q) v[i++] = 0;
    return i < v.size();
  };
  do {
    std::map<std::string, std::vector<long>> vc;
    for (int x = 0; x < n; ++x) {
      auto& v = vc[idx.var_key[static_cast<std::size_t>(x)]];
      v.resize(static_cast<std::size_t>(Q), 0);
      v[static_cast<std::size_t>(sv[static_cast<std::size_t>(x)])]++;
    }
    if (vc != var_counts) continue;
    std::fill(sf.begin(), sf.end(), 0);
    do {
      std::map<std::string, std::vector<long>> fcnt;
      double logpsi = 0;
      for (int a = 0; a < M.m(); ++a) {
        const std::string& k = idx.factor_key[static_cast<std::size_t>(a)];
        auto& v = fcnt[k];
        v.resize(checked_pow(Q, M.factor_degree(a)), 0);
        std::size_t t = 0;
        for (int j : idx.factor_canon[static_cast<std::size_t>(a)]) t = t * static_cast<std::size_t>(Q) + static_cast<std::size_t>(sf[static_cast<std::size_t>(M.factor_clone(a, j))]);
        v[t]++;
        std::size_t raw = 0;
        for (int j = 0; j < M.factor_degree(a); ++j) raw = raw * static_cast<std::size_t>(Q) + static_cast<std::size_t>(sf[static_cast<std::size_t>(M.factor_clone(a, j))]);
        logpsi += M.weight_of(a).log_table()[raw];
      }
      if (fcnt != factor_counts) continue;
      // per (type, symbol): variable clones must match constraint clones
      std::vector<long> bal(static_cast<std::size_t>(T * Q), 0), cnt(static_cast<std::size_t>(T * Q), 0);
      for (int c = 0; c < C; ++c) {
        auto [x, i] = M.var_clone_owner(c);
        const std::size_t cell = static_cast<std::size_t>(vtype[static_cast<std::size_t>(c)] * Q + sv[static_cast<std::size_t>(x)]);
        bal[cell]++;
        cnt[cell]++;
      }
      for (int f = 0; f < C; ++f) bal[static_cast<std::size_t>(ftype[static_cast<std::size_t>(f)] * Q + sf[static_cast<std::size_t>(f)])]--;
      if (std::any_of(bal.begin(), bal.end(), [](long b) { return b != 0; })) continue;
      double log_typed = 0;
      for (long c : cnt) log_typed += lfact(c);
      terms.push_back(logpsi + log_typed - log_all);
    } while (bump(sf));
  } while (bump(sv));
  if (terms.empty()) return -INFINITY;
  const double mx = *std::max_element(terms.begin(), terms.end());
  double s = 0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected, double min_expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("chi_square_p: size mismatch");
  double stat = 0, pooled_o = 0, pooled_e = 0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      pooled_o += observed[i];
      pooled_e += expected[i];
      continue;
    }
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++cells;
  }
  if (pooled_e > 0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace oracle
