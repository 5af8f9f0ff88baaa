#pragma once

#include <vector>

#include "bethelab/measure.hpp"

namespace bethelab::fixtures {

DenseMeasure product(const Alphabet& a, int n, const Dist& p);
DenseMeasure product(const Alphabet& a, const std::vector<Dist>& per_coordinate);
DenseMeasure point_mass(const Alphabet& a, const std::vector<int>& sigma);

// sqrt(n) blocks of sqrt(n) coordinates; each block is constant, with its
// value drawn from p independently of the other blocks.
DenseMeasure block(const Alphabet& a, int n, const Dist& p);

// Equal-weight mixture of Be(1/3)^n and Be(2/3)^n on {0,1}^n.
DenseMeasure mixture(int n);
// The set {sigma : sum(sigma) <= n/2} of the mixture above.
AssignmentSet mixture_low_half(int n);

// Be(1/2) on the first n/2 coordinates and Be(1/3) on the rest (n even).
DenseMeasure half_biased(int n);

}  // namespace bethelab::fixtures
