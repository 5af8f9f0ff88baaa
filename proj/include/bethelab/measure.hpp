#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bethelab {

using Dist = std::vector<double>;
using Coords = std::vector<int>;
using Partition = std::vector<Coords>;
// Indicator of a subset of Omega^n, indexed like DenseMeasure entries.
using AssignmentSet = std::vector<char>;

inline constexpr double kNormTolerance = 1e-12;

struct Alphabet {
  std::vector<std::string> symbols;

  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> s);
  static Alphabet binary();  // "0","1"
  static Alphabet spins();   // "-1","+1"
  static Alphabet integers(int q);

  int size() const { return static_cast<int>(symbols.size()); }
  int index_of(const std::string& s) const;
  bool operator==(const Alphabet&) const = default;
};

std::size_t checked_pow(int q, int n);

// Probability measure on Omega^n stored densely. Entry order is lexicographic
// with coordinate 0 most significant.
class DenseMeasure {
 public:
  DenseMeasure(Alphabet alphabet, int n, std::vector<double> mass);
  static DenseMeasure from_weights(Alphabet alphabet, int n, std::vector<double> weights);
  static DenseMeasure from_log_weights(Alphabet alphabet, int n, const std::vector<double>& log_weights);

  const Alphabet& alphabet() const { return alphabet_; }
  int n() const { return n_; }
  int q() const { return alphabet_.size(); }
  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  const std::vector<double>& masses() const { return mass_; }

  std::vector<int> decode(std::size_t index) const;
  std::size_t encode(const std::vector<int>& sigma) const;

  double mass_of(const AssignmentSet& s) const;
  DenseMeasure conditional(const AssignmentSet& s) const;
  Dist marginal(int x) const;
  DenseMeasure marginal(const Coords& coords) const;

 private:
  Alphabet alphabet_;
  int n_;
  std::vector<double> mass_;
};

// Visits every sigma in Omega^n in entry order; sigma is updated in place.
template <class F>
void for_each_assignment(int q, int n, F&& f) {
  std::vector<int> sigma(static_cast<std::size_t>(n), 0);
  const std::size_t total = checked_pow(q, n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    f(idx, static_cast<const std::vector<int>&>(sigma));
    for (int x = n - 1; x >= 0; --x) {
      if (++sigma[static_cast<std::size_t>(x)] < q) break;
      sigma[static_cast<std::size_t>(x)] = 0;
    }
  }
}

Dist empirical(const std::vector<int>& sigma, const Coords& subset, int q);
double tv(const Dist& a, const Dist& b);
double entropy(const Dist& p);
double kl(const Dist& nu, const Dist& mu);
Dist product_distribution(const std::vector<Dist>& factors);
Dist uniform_distribution(int q);

}  // namespace bethelab
