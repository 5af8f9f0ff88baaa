#include "bethelab/fixtures.hpp"

#include <cmath>
#include <stdexcept>

namespace bethelab::fixtures {

DenseMeasure product(const Alphabet& a, int n, const Dist& p) {
  return product(a, std::vector<Dist>(static_cast<std::size_t>(n), p));
}

DenseMeasure product(const Alphabet& a, const std::vector<Dist>& per) {
  if (per.empty()) throw std::invalid_argument("product measure needs n >= 1");
  for (const Dist& p : per)
    if (static_cast<int>(p.size()) != a.size()) throw std::invalid_argument("marginal size does not match alphabet");
  const int n = static_cast<int>(per.size());
  std::vector<double> w(checked_pow(a.size(), n));
  for_each_assignment(a.size(), n, [&](std::size_t idx, const std::vector<int>& s) {
    double v = 1;
    for (int x = 0; x < n; ++x) v *= per[static_cast<std::size_t>(x)][static_cast<std::size_t>(s[static_cast<std::size_t>(x)])];
    w[idx] = v;
  });
  return DenseMeasure::from_weights(a, n, std::move(w));
}

DenseMeasure point_mass(const Alphabet& a, const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  std::vector<double> w(checked_pow(a.size(), n), 0.0);
  std::size_t idx = 0;
  for (int v : sigma) {
    if (v < 0 || v >= a.size()) throw std::invalid_argument("point mass symbol out of range");
    idx = idx * static_cast<std::size_t>(a.size()) + static_cast<std::size_t>(v);
  }
  w[idx] = 1.0;
  return DenseMeasure(a, n, std::move(w));
}

DenseMeasure block(const Alphabet& a, int n, const Dist& p) {
  const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (b * b != n) throw std::invalid_argument("block measure needs a perfect-square n");
  if (static_cast<int>(p.size()) != a.size()) throw std::invalid_argument("block law size does not match alphabet");
  std::vector<double> w(checked_pow(a.size(), n), 0.0);
  for_each_assignment(a.size(), n, [&](std::size_t idx, const std::vector<int>& s) {
    double v = 1;
    for (int blk = 0; blk < b && v > 0; ++blk) {
      const int first = s[static_cast<std::size_t>(blk * b)];
      for (int i = 1; i < b; ++i)
        if (s[static_cast<std::size_t>(blk * b + i)] != first) v = 0;
      v *= p[static_cast<std::size_t>(first)];
    }
    w[idx] = v;
  });
  return DenseMeasure::from_weights(a, n, std::move(w));
}

DenseMeasure mixture(int n) {
  std::vector<double> w(checked_pow(2, n));
  for_each_assignment(2, n, [&](std::size_t idx, const std::vector<int>& s) {
    int ones = 0;
    for (int v : s) ones += v;
    w[idx] = 0.5 * (std::pow(1.0 / 3, ones) * std::pow(2.0 / 3, n - ones) +
                    std::pow(2.0 / 3, ones) * std::pow(1.0 / 3, n - ones));
  });
  return DenseMeasure::from_weights(Alphabet::binary(), n, std::move(w));
}

AssignmentSet mixture_low_half(int n) {
  AssignmentSet s(checked_pow(2, n), 0);
  for_each_assignment(2, n, [&](std::size_t idx, const std::vector<int>& sig) {
    int ones = 0;
    for (int v : sig) ones += v;
    s[idx] = 2 * ones <= n;
  });
  return s;
}

DenseMeasure half_biased(int n) {
  if (n < 2 || n % 2) throw std::invalid_argument("half_biased needs an even n >= 2");
  std::vector<Dist> per;
  for (int x = 0; x < n; ++x) per.push_back(x < n / 2 ? Dist{0.5, 0.5} : Dist{2.0 / 3, 1.0 / 3});
  return product(Alphabet::binary(), per);
}

}  // namespace bethelab::fixtures
