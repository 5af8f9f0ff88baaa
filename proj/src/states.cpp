#include "bethelab/states.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "bethelab/errors.hpp"

namespace bethelab {

namespace {

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Score of mu conditioned on S (not renormalised: `w` holds the weights).
double state_score(const DenseMeasure& mu, const std::vector<double>& w, int k, std::uint64_t cap) {
  const int n = mu.n(), q = mu.q();
  if (k < 1 || k > n) throw std::invalid_argument("is_state: k must lie in [1, n]");
  if (k == 1) return 0.0;
  check_budget("is_state enumeration", binomial(n, k) * mu.size(), cap);
  long double total_w = 0;
  for (double x : w) total_w += x;
  std::vector<int> combo(static_cast<std::size_t>(k));
  std::iota(combo.begin(), combo.end(), 0);
  const std::size_t jsize = checked_pow(q, k);
  std::vector<double> joint(jsize);
  double sum = 0;
  for (;;) {
    std::fill(joint.begin(), joint.end(), 0.0);
    for_each_assignment(q, n, [&](std::size_t idx, const std::vector<int>& s) {
      if (w[idx] <= 0) return;
      std::size_t j = 0;
      for (int c : combo) j = j * static_cast<std::size_t>(q) + static_cast<std::size_t>(s[static_cast<std::size_t>(c)]);
      joint[j] += w[idx];
    });
    for (double& x : joint) x = static_cast<double>(x / total_w);
    std::vector<Dist> margs(static_cast<std::size_t>(k), Dist(static_cast<std::size_t>(q), 0.0));
    for (std::size_t j = 0; j < jsize; ++j) {
      std::size_t r = j;
      for (int i = k - 1; i >= 0; --i) {
        margs[static_cast<std::size_t>(i)][r % static_cast<std::size_t>(q)] += joint[j];
        r /= static_cast<std::size_t>(q);
      }
    }
    sum += tv(joint, product_distribution(margs));
    // next combination
    int i = k - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int t = i + 1; t < k; ++t) combo[static_cast<std::size_t>(t)] = combo[static_cast<std::size_t>(t - 1)] + 1;
  }
  // ordered tuples of distinct coordinates: k! per subset
  return sum * factorial(k) / std::pow(static_cast<double>(n), k);
}

std::vector<double> restricted_weights(const DenseMeasure& mu, const AssignmentSet& S) {
  if (S.size() != mu.size()) throw std::invalid_argument("assignment set has wrong length");
  std::vector<double> w(mu.size(), 0.0);
  double m = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (S[i]) {
      w[i] = mu[i];
      m += mu[i];
    }
  if (!(m > 0)) throw std::invalid_argument("is_state: S has zero mass");
  return w;
}

}  // namespace

AssignmentSet full_set(const DenseMeasure& mu) { return AssignmentSet(mu.size(), 1); }

StateCheck is_state(const DenseMeasure& mu, const AssignmentSet& S, double eps, int k, std::uint64_t cap) {
  if (!(eps > 0)) throw std::invalid_argument("is_state: eps must be positive");
  StateCheck c;
  c.score = state_score(mu, restricted_weights(mu, S), k, cap);
  c.passes = c.score < eps;
  return c;
}

StateCheck is_symmetric(const DenseMeasure& mu, double eps, int k, std::uint64_t cap) {
  return is_state(mu, full_set(mu), eps, k, cap);
}

namespace {

struct Atom {
  std::vector<int> counts;  // per class, per symbol
  std::vector<double> feature;
  std::vector<std::size_t> members;
  double mass = 0;
};

std::vector<Atom> exact_atoms(const DenseMeasure& mu, const Partition& V) {
  const int q = mu.q();
  std::vector<int> cls(static_cast<std::size_t>(mu.n()));
  for (std::size_t j = 0; j < V.size(); ++j)
    for (int x : V[j]) cls[static_cast<std::size_t>(x)] = static_cast<int>(j);
  std::map<std::vector<int>, std::size_t> ids;
  std::vector<Atom> atoms;
  std::vector<int> c(V.size() * static_cast<std::size_t>(q));
  for_each_assignment(q, mu.n(), [&](std::size_t idx, const std::vector<int>& s) {
    std::fill(c.begin(), c.end(), 0);
    for (int x = 0; x < mu.n(); ++x)
      c[static_cast<std::size_t>(cls[static_cast<std::size_t>(x)]) * static_cast<std::size_t>(q) +
        static_cast<std::size_t>(s[static_cast<std::size_t>(x)])]++;
    auto [it, inserted] = ids.emplace(c, atoms.size());
    if (inserted) {
      atoms.emplace_back();
      atoms.back().counts = c;
      for (std::size_t j = 0; j < V.size(); ++j)
        for (int w = 0; w < q; ++w)
          atoms.back().feature.push_back(c[j * static_cast<std::size_t>(q) + static_cast<std::size_t>(w)] /
                                         static_cast<double>(V[j].size()));
    }
    atoms[it->second].members.push_back(idx);
    atoms[it->second].mass += mu[idx];
  });
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.counts < b.counts; });
  return atoms;
}

// Leading principal direction of the mass-weighted features.
std::vector<double> principal_direction(const std::vector<Atom>& atoms, const std::vector<int>& group) {
  const std::size_t dim = atoms.front().feature.size();
  std::vector<double> mean(dim, 0.0);
  double mass = 0;
  for (int a : group) {
    mass += atoms[static_cast<std::size_t>(a)].mass;
    for (std::size_t i = 0; i < dim; ++i) mean[i] += atoms[static_cast<std::size_t>(a)].mass * atoms[static_cast<std::size_t>(a)].feature[i];
  }
  for (double& v : mean) v /= mass;
  std::vector<double> cov(dim * dim, 0.0);
  for (int a : group) {
    const Atom& at = atoms[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) cov[i * dim + j] += at.mass * (at.feature[i] - mean[i]) * (at.feature[j] - mean[j]);
  }
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);
  for (int it = 0; it < 500; ++it) {
    std::vector<double> nv(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) nv[i] += cov[i * dim + j] * v[j];
    double norm = 0;
    for (double x : nv) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-300) break;
    for (std::size_t i = 0; i < dim; ++i) v[i] = nv[i] / norm;
  }
  for (double x : v)
    if (std::fabs(x) > 1e-12) {
      if (x < 0)
        for (double& y : v) y = -y;
      break;
    }
  return v;
}

struct Extractor {
  const DenseMeasure& mu;
  double eps;
  int k;
  const ExtractionOptions& opt;
  const std::vector<Atom>& atoms;
  ExtractedStates& out;

  std::vector<double> weights_of(const std::vector<int>& group) const {
    std::vector<double> w(mu.size(), 0.0);
    for (int a : group)
      for (std::size_t idx : atoms[static_cast<std::size_t>(a)].members) w[idx] = mu[idx];
    return w;
  }
  double mass_of(const std::vector<int>& group) const {
    double m = 0;
    for (int a : group) m += atoms[static_cast<std::size_t>(a)].mass;
    return m;
  }

  void emit(const std::vector<int>& group, double score) {
    AssignmentSet s(mu.size(), 0);
    for (int a : group)
      for (std::size_t idx : atoms[static_cast<std::size_t>(a)].members) s[idx] = 1;
    out.states.push_back(std::move(s));
    out.masses.push_back(mass_of(group));
    out.scores.push_back(score);
  }

  void split(std::vector<int> group) {
    const double m = mass_of(group);
    if (!(m > 0) || m < opt.min_mass) {
      if (m > 0) ++out.dropped_groups;
      return;
    }
    const double score = state_score(mu, weights_of(group), k, opt.work_cap);
    if (score < eps) {
      emit(group, score);
      return;
    }
    std::vector<int> positive;
    for (int a : group)
      if (atoms[static_cast<std::size_t>(a)].mass > 0) positive.push_back(a);
    if (positive.size() < 2) {
      ++out.dropped_groups;
      return;
    }
    const std::vector<double> dir = principal_direction(atoms, positive);
    std::vector<std::pair<double, int>> order;
    for (int a : positive) {
      double p = 0;
      for (std::size_t i = 0; i < dir.size(); ++i) p += dir[i] * atoms[static_cast<std::size_t>(a)].feature[i];
      order.emplace_back(std::round(p * 1e12) / 1e12, a);
    }
    std::stable_sort(order.begin(), order.end());
    std::size_t best_t = 1;
    double best = INFINITY;
    for (std::size_t t = 1; t < order.size(); ++t) {
      std::vector<int> L, R;
      for (std::size_t i = 0; i < order.size(); ++i) (i < t ? L : R).push_back(order[i].second);
      double v = std::max(state_score(mu, weights_of(L), k, opt.work_cap), state_score(mu, weights_of(R), k, opt.work_cap));
      if (v < best - 1e-15) {
        best = v;
        best_t = t;
      }
    }
    std::vector<int> L, R;
    for (std::size_t i = 0; i < order.size(); ++i) (i < best_t ? L : R).push_back(order[i].second);
    std::sort(L.begin(), L.end());
    std::sort(R.begin(), R.end());
    split(L);
    split(R);
  }
};

}  // namespace

ExtractedStates extract_states(const DenseMeasure& mu, double eps, int k, const ExtractionOptions& opt) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("extract_states: eps must lie in (0,1)");
  ExtractedStates out;
  Decomposition d = decompose(mu, trivial_partition(mu.n()), opt.atom_eps, opt.regularity);
  out.atom_partition = d.V;
  std::vector<Atom> atoms = exact_atoms(mu, d.V);
  out.atoms = static_cast<int>(atoms.size());
  std::vector<int> all(atoms.size());
  std::iota(all.begin(), all.end(), 0);
  Extractor ex{mu, eps, k, opt, atoms, out};
  ex.split(all);
  for (double m : out.masses) out.coverage += m;
  out.covers = out.coverage >= 1 - eps;
  return out;
}

Alphabet tensor_alphabet(const Alphabet& a) {
  std::vector<std::string> s;
  for (const auto& x : a.symbols)
    for (const auto& y : a.symbols) s.push_back("(" + x + "," + y + ")");
  return Alphabet(std::move(s));
}

DenseMeasure tensor_square(const DenseMeasure& mu, std::uint64_t cap) {
  const int q = mu.q(), n = mu.n();
  const std::size_t N = mu.size();
  check_budget("tensor_square", static_cast<std::uint64_t>(N) * N, cap);
  std::vector<double> out(N * N, 0.0);
  std::vector<std::vector<int>> digits(N);
  for (std::size_t i = 0; i < N; ++i) digits[i] = mu.decode(i);
  const std::size_t Q = static_cast<std::size_t>(q) * static_cast<std::size_t>(q);
  for (std::size_t i = 0; i < N; ++i) {
    if (mu[i] <= 0) continue;
    for (std::size_t j = 0; j < N; ++j) {
      std::size_t t = 0;
      for (int x = 0; x < n; ++x)
        t = t * Q + static_cast<std::size_t>(digits[i][static_cast<std::size_t>(x)]) * static_cast<std::size_t>(q) +
            static_cast<std::size_t>(digits[j][static_cast<std::size_t>(x)]);
      out[t] = mu[i] * mu[j];
    }
  }
  return DenseMeasure::from_weights(tensor_alphabet(mu.alphabet()), n, std::move(out));
}

}  // namespace bethelab
