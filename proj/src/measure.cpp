#include "bethelab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bethelab/errors.hpp"

namespace bethelab {

Alphabet::Alphabet(std::vector<std::string> s) : symbols(std::move(s)) {
  if (symbols.empty()) throw std::invalid_argument("alphabet must be non-empty");
  auto sorted = symbols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("alphabet symbols must be distinct");
}

Alphabet Alphabet::binary() { return Alphabet({"0", "1"}); }
Alphabet Alphabet::spins() { return Alphabet({"-1", "+1"}); }
Alphabet Alphabet::integers(int q) {
  if (q < 1) throw std::invalid_argument("alphabet size must be positive");
  std::vector<std::string> s;
  for (int i = 0; i < q; ++i) s.push_back(std::to_string(i));
  return Alphabet(std::move(s));
}

int Alphabet::index_of(const std::string& s) const {
  auto it = std::find(symbols.begin(), symbols.end(), s);
  if (it == symbols.end()) throw std::invalid_argument("unknown symbol '" + s + "'");
  return static_cast<int>(it - symbols.begin());
}

std::size_t checked_pow(int q, int n) {
  if (q < 1 || n < 0) throw std::invalid_argument("checked_pow: bad arguments");
  std::uint64_t r = saturating_pow(static_cast<std::uint64_t>(q), n);
  if (r > (std::uint64_t{1} << 40)) throw BudgetExceeded("dense table size", r, std::uint64_t{1} << 40);
  return static_cast<std::size_t>(r);
}

namespace {

long double total(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return s;
}

void check_entries(const std::vector<double>& v) {
  for (double x : v)
    if (!(x >= 0) || !std::isfinite(x))
      throw std::invalid_argument("measure entries must be finite and non-negative");
}

}  // namespace

DenseMeasure::DenseMeasure(Alphabet alphabet, int n, std::vector<double> mass)
    : alphabet_(std::move(alphabet)), n_(n), mass_(std::move(mass)) {
  if (alphabet_.size() < 1) throw std::invalid_argument("empty alphabet");
  if (n_ < 1) throw std::invalid_argument("measure needs n >= 1");
  if (mass_.size() != checked_pow(alphabet_.size(), n_))
    throw std::invalid_argument("mass vector has wrong length");
  check_entries(mass_);
  long double s = total(mass_);
  if (std::fabs(static_cast<double>(s) - 1.0) > kNormTolerance)
    throw std::invalid_argument("measure entries sum to " + std::to_string(static_cast<double>(s)) +
                                ", outside normalisation tolerance");
  for (double& x : mass_) x = static_cast<double>(x / s);
}

DenseMeasure DenseMeasure::from_weights(Alphabet alphabet, int n, std::vector<double> weights) {
  check_entries(weights);
  long double s = total(weights);
  if (!(s > 0)) throw std::invalid_argument("weights have zero total mass");
  for (double& x : weights) x = static_cast<double>(x / s);
  return DenseMeasure(std::move(alphabet), n, std::move(weights));
}

DenseMeasure DenseMeasure::from_log_weights(Alphabet alphabet, int n, const std::vector<double>& lw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : lw) mx = std::max(mx, x);
  if (!std::isfinite(mx)) throw std::invalid_argument("log weights have no finite maximum");
  std::vector<double> w(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - mx);
  return from_weights(std::move(alphabet), n, std::move(w));
}

std::vector<int> DenseMeasure::decode(std::size_t index) const {
  std::vector<int> s(static_cast<std::size_t>(n_));
  const int q = this->q();
  for (int x = n_ - 1; x >= 0; --x) {
    s[static_cast<std::size_t>(x)] = static_cast<int>(index % static_cast<std::size_t>(q));
    index /= static_cast<std::size_t>(q);
  }
  return s;
}

std::size_t DenseMeasure::encode(const std::vector<int>& sigma) const {
  if (static_cast<int>(sigma.size()) != n_) throw std::invalid_argument("assignment length mismatch");
  std::size_t idx = 0;
  for (int v : sigma) {
    if (v < 0 || v >= q()) throw std::invalid_argument("assignment symbol out of range");
    idx = idx * static_cast<std::size_t>(q()) + static_cast<std::size_t>(v);
  }
  return idx;
}

double DenseMeasure::mass_of(const AssignmentSet& s) const {
  if (s.size() != mass_.size()) throw std::invalid_argument("assignment set has wrong length");
  long double m = 0;
  for (std::size_t i = 0; i < mass_.size(); ++i)
    if (s[i]) m += mass_[i];
  return static_cast<double>(m);
}

DenseMeasure DenseMeasure::conditional(const AssignmentSet& s) const {
  if (mass_of(s) <= 0) throw std::invalid_argument("conditioning on a set of zero mass");
  std::vector<double> w(mass_.size(), 0.0);
  for (std::size_t i = 0; i < mass_.size(); ++i)
    if (s[i]) w[i] = mass_[i];
  return from_weights(alphabet_, n_, std::move(w));
}

Dist DenseMeasure::marginal(int x) const {
  if (x < 0 || x >= n_) throw std::invalid_argument("coordinate out of range");
  Dist p(static_cast<std::size_t>(q()), 0.0);
  for_each_assignment(q(), n_, [&](std::size_t idx, const std::vector<int>& s) {
    p[static_cast<std::size_t>(s[static_cast<std::size_t>(x)])] += mass_[idx];
  });
  return p;
}

DenseMeasure DenseMeasure::marginal(const Coords& coords) const {
  if (coords.empty()) throw std::invalid_argument("marginal over empty coordinate set");
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  for (int c : coords) {
    if (c < 0 || c >= n_) throw std::invalid_argument("coordinate out of range");
    if (seen[static_cast<std::size_t>(c)]++) throw std::invalid_argument("repeated coordinate in marginal");
  }
  const int k = static_cast<int>(coords.size());
  std::vector<double> out(checked_pow(q(), k), 0.0);
  for_each_assignment(q(), n_, [&](std::size_t idx, const std::vector<int>& s) {
    std::size_t j = 0;
    for (int c : coords) j = j * static_cast<std::size_t>(q()) + static_cast<std::size_t>(s[static_cast<std::size_t>(c)]);
    out[j] += mass_[idx];
  });
  return from_weights(alphabet_, k, std::move(out));
}

Dist empirical(const std::vector<int>& sigma, const Coords& subset, int q) {
  if (subset.empty()) throw std::invalid_argument("empirical distribution over empty set");
  Dist p(static_cast<std::size_t>(q), 0.0);
  for (int x : subset) {
    if (x < 0 || x >= static_cast<int>(sigma.size())) throw std::invalid_argument("coordinate out of range");
    int v = sigma[static_cast<std::size_t>(x)];
    if (v < 0 || v >= q) throw std::invalid_argument("symbol out of range");
    p[static_cast<std::size_t>(v)] += 1.0;
  }
  for (double& v : p) v /= static_cast<double>(subset.size());
  return p;
}

double tv(const Dist& a, const Dist& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

double entropy(const Dist& p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return h;
}

double kl(const Dist& nu, const Dist& mu) {
  if (nu.size() != mu.size()) throw std::invalid_argument("kl: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] <= 0) continue;
    if (mu[i] <= 0) return std::numeric_limits<double>::infinity();
    s += nu[i] * std::log(nu[i] / mu[i]);
  }
  return std::max(s, 0.0);
}

Dist product_distribution(const std::vector<Dist>& factors) {
  Dist out{1.0};
  for (const Dist& f : factors) {
    Dist next;
    next.reserve(out.size() * f.size());
    for (double a : out)
      for (double b : f) next.push_back(a * b);
    out = std::move(next);
  }
  return out;
}

Dist uniform_distribution(int q) {
  if (q < 1) throw std::invalid_argument("uniform over empty alphabet");
  return Dist(static_cast<std::size_t>(q), 1.0 / q);
}

}  // namespace bethelab
