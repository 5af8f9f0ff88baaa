#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "bethelab/errors.hpp"
#include "bethelab/families.hpp"
#include "bethelab/moments.hpp"
#include "bethelab/partition.hpp"
#include "oracles.hpp"

using namespace bethelab;

namespace {

std::vector<int> random_sigma(std::mt19937_64& rng, int n, int q) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int& v : s) v = static_cast<int>(rng() % static_cast<std::uint64_t>(q));
  return s;
}

MarginalSequence uniform_sequence(const LocalIndex& idx) {
  MarginalSequence s;
  s.depth = idx.depth;
  s.q = idx.q;
  for (const auto& [k, c] : idx.var_count) s.variables[k] = uniform_distribution(idx.q);
  for (const auto& [k, slots] : idx.factor_slots) s.factors[k] = uniform_distribution(static_cast<int>(checked_pow(idx.q, static_cast<int>(slots.size()))));
  return s;
}

MarginalAssignment cycle_assignment(double beta, int ell) {
  return build_marginal_assignment(limit_tree(ising_law(2, beta), ell + 1), ell, 1);
}

}  // namespace

TEST_CASE("empirical sequence of a constant assignment") {
  FactorGraph g = ring(ising(10, 2, 0.5));
  LocalIndex idx = local_index(g, 1);
  CHECK(idx.var_count.size() == 1);
  CHECK(idx.factor_count.size() == 1);
  MarginalSequence s = empirical_sequence(idx, g, std::vector<int>(10, 1));
  CHECK(s.variables.begin()->second == Dist{0, 1});
  CHECK(s.factors.begin()->second == Dist{0, 0, 0, 1});
  CHECK(ms3_residual(idx, s) == doctest::Approx(0.0));
  CHECK_THROWS_AS(empirical_sequence(idx, g, std::vector<int>(9, 1)), std::invalid_argument);
}

TEST_CASE("empirical sequences always balance") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ModelPtr m = seed % 3 == 0 ? ising(12, 3, 0.3) : seed % 3 == 1 ? potts(12, 3, 3, 0.3) : ksat_regular(12, 3, 0.5, 2, 1, seed);
    FactorGraph g = sample_graph(m, seed);
    LocalIndex idx = local_index(g, static_cast<int>(seed % 2));
    MarginalSequence s = empirical_sequence(idx, g, random_sigma(rng, g.n(), g.q()));
    for (const auto& [k, d] : s.variables) CHECK(std::accumulate(d.begin(), d.end(), 0.0) == doctest::Approx(1.0));
    for (const auto& [k, d] : s.factors) CHECK(std::accumulate(d.begin(), d.end(), 0.0) == doctest::Approx(1.0));
    CHECK(ms3_residual(idx, s) < 1e-12);
  }
}

TEST_CASE("graph Bethe functional") {
  SUBCASE("uniform sequence at beta = 0 gives ln q") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      FactorGraph g = sample_graph(seed % 2 ? potts(12, 3, 3, 0.0) : ksat_regular(12, 3, 0.0, 1, 1, seed), seed);
      LocalIndex idx = local_index(g, 0);
      CHECK(graph_bethe(idx, uniform_sequence(idx)) == doctest::Approx(std::log(static_cast<double>(g.q()))).epsilon(1e-12));
    }
  }
  SUBCASE("a long cycle reproduces the limit value") {
    for (double b : {0.2, 1.0}) {
      FactorGraph g = ring(ising(20, 2, b));
      LocalIndex idx = local_index(g, 1);
      MarginalSequence s = sequence_from_assignment(idx, cycle_assignment(b, 1));
      CHECK(graph_bethe(idx, s) == doctest::Approx(std::log(2 * std::cosh(b))).epsilon(1e-10));
      CHECK(ms3_residual(idx, s) < 1e-10);
    }
  }
  SUBCASE("missing keys are reported") {
    FactorGraph g = ring(ising(8, 2, 0.3));
    LocalIndex idx = local_index(g, 1);
    CHECK_THROWS_AS(graph_bethe(idx, MarginalSequence{}), std::out_of_range);
  }
}

TEST_CASE("restricted partition function") {
  SUBCASE("delta >= 1 admits everything") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      FactorGraph g = sample_graph(potts(8, 3, 3, 0.7), seed);
      LocalIndex idx = local_index(g, 0);
      RestrictionWindow w{0, uniform_sequence(idx), 1.0};
      RestrictedPartition r = restricted_partition(g, idx, w);
      CHECK(r.admitted == r.assignments);
      CHECK(r.log_z == doctest::Approx(oracle::brute_log_z(g)).epsilon(1e-12));
    }
  }
  SUBCASE("cycle of 10 against the direct filter") {
    FactorGraph g = ring(ising(10, 2, 0.5));
    LocalIndex idx = local_index(g, 1);
    MarginalSequence s = sequence_from_assignment(idx, cycle_assignment(0.5, 1));
    double prev = -std::numeric_limits<double>::infinity();
    for (double d : {0.05, 0.1, 0.2, 0.3, 0.5}) {
      RestrictedPartition r = restricted_partition(g, RestrictionWindow{1, s, d});
      const double want = oracle::filtered_log_z(g, idx, s, d);
      if (std::isinf(want))
        CHECK(r.admitted == 0);
      else
        CHECK(r.log_z == doctest::Approx(want).epsilon(1e-12));
      CHECK(r.log_z >= prev);
      prev = r.log_z;
    }
  }
  SUBCASE("bad windows") {
    FactorGraph g = ring(ising(6, 2, 0.5));
    LocalIndex idx = local_index(g, 1);
    CHECK_THROWS_AS(restricted_partition(g, RestrictionWindow{1, uniform_sequence(idx), -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(restricted_partition(g, RestrictionWindow{0, uniform_sequence(idx), 0.1}), std::invalid_argument);
  }
}

TEST_CASE("local classes and resampling") {
  SUBCASE("resampling respects the enhanced types") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      FactorGraph g = sample_graph(seed % 2 ? ksat_regular(16, 3, 1.0, 2, 1, seed) : ising(16, 3, 0.5), seed);
      LocalIndex idx = local_index(g, 1);
      EnhancedTypes t = enhanced_types(g, idx);
      FactorGraph h = resample_local_class(g, t, seed + 100);
      for (int c = 0; c < g.model().num_clones(); ++c)
        CHECK(t.var_class[static_cast<std::size_t>(c)] == t.factor_class[static_cast<std::size_t>(h.factor_clone_of(c))]);
      FactorGraph h2 = resample_local_class(g, t, seed + 100);
      CHECK(h.matching() == h2.matching());
    }
  }
  SUBCASE("in-class members share every key, so lambda agrees") {
    FactorGraph g = ring(ising(16, 2, 0.3));
    LocalIndex idx = local_index(g, 1);
    int in_class = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      FactorGraph h = resample_local_class(g, 1, s);
      LocalIndex hi = local_index(h, 1);
      if (!same_local_class(idx, hi)) continue;
      ++in_class;
      CHECK(hi.var_count == idx.var_count);
      CHECK(hi.factor_count == idx.factor_count);
      CHECK(class_signature(hi) == class_signature(idx));
    }
    CHECK(in_class > 0);
  }
  SUBCASE("strict mode needs the acyclicity guarantee") {
    FactorGraph g = ring(ising(16, 2, 0.3));
    CHECK_FALSE(resampling_guarantee(g, 1));
    CHECK_THROWS_AS(resample_local_class(g, 1, 0, true), std::invalid_argument);
    CHECK(resampling_guarantee(g, 0));
  }
}

TEST_CASE("conditional first moment") {
  SUBCASE("formula at beta = 0 is n ln 2") {
    FactorGraph g = sample_graph(ising(12, 3, 0.0), 2);
    LocalIndex idx = local_index(g, 0);
    MomentEstimate e = conditional_first_moment(g, RestrictionWindow{0, uniform_sequence(idx), 0.1}, MomentMode::Formula);
    CHECK(e.mode == "formula");
    CHECK(e.value == doctest::Approx(12 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("Monte Carlo at beta = 0 with an open window is exact") {
    FactorGraph g = ring(ising(8, 2, 0.0));
    LocalIndex idx = local_index(g, 1);
    MomentEstimate e = conditional_first_moment(g, RestrictionWindow{1, uniform_sequence(idx), 1.0}, MomentMode::MonteCarlo, 50, 3);
    CHECK(e.in_class > 0);
    CHECK(e.value == doctest::Approx(8 * std::log(2.0)).epsilon(1e-12));
    CHECK(e.band == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(conditional_first_moment(g, RestrictionWindow{1, uniform_sequence(idx), 1.0}, MomentMode::MonteCarlo, 0, 3),
                    std::invalid_argument);
  }
  SUBCASE("unbalanced sequences are rejected") {
    FactorGraph g = ring(ising(8, 2, 0.4));
    LocalIndex idx = local_index(g, 1);
    MarginalSequence s = uniform_sequence(idx);
    s.variables.begin()->second = Dist{0.7, 0.3};
    CHECK_THROWS_AS(conditional_first_moment(g, RestrictionWindow{1, s, 0.1}, MomentMode::Formula), std::invalid_argument);
  }
}

TEST_CASE("judicious assignments") {
  FactorGraph g = ring(ising(10, 2, 0.0));
  MarginalAssignment p = cycle_assignment(0.0, 1);
  std::vector<int> alt(10);
  for (int x = 0; x < 10; ++x) alt[static_cast<std::size_t>(x)] = x % 2;
  JudiciousResult a = is_judicious(g, alt, p, 0.05, 1);
  CHECK(a.judicious);
  CHECK(a.score == doctest::Approx(0.0));
  JudiciousResult c = is_judicious(g, std::vector<int>(10, 0), p, 0.05, 1);
  CHECK_FALSE(c.judicious);
  // variable TV 1/2 plus two slots of TV 1/2
  CHECK(c.score == doctest::Approx(1.5));
}

TEST_CASE("q-valid clone assignments against direct enumeration") {
  std::mt19937_64 rng(8);
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    FactorGraph g = sample_graph(seed % 2 ? ising(4, 3, 0.6) : ising(6, 2, 0.6), seed);
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<int> sigma = random_sigma(rng, g.n(), 2);
      MarginalSequence s = empirical_sequence(g, sigma, 0);
      QValidCount c = count_q_valid_ratio(g, 0, s);
      CHECK(c.rounding_residual < 1e-12);
      LocalIndex idx = local_index(g, 0);
      const double exact = oracle::q_valid_log_ratio(g, idx, c.var_counts, c.factor_counts);
      // at these sizes the polynomial Stirling factor outweighs sqrt(n):
      // allow ln(n+1) per multinomial cell
      std::size_t cells = 0;
      for (const auto& [k, v] : c.var_counts) cells += v.size();
      for (const auto& [k, v] : c.factor_counts) cells += v.size();
      CHECK(c.band == doctest::Approx(std::sqrt(static_cast<double>(g.n()))));
      CHECK(std::fabs(c.value - exact) <= static_cast<double>(cells) * std::log(g.n() + 1.0));
      ++compared;
    }
  }
  CHECK(compared == 18);
}

TEST_CASE("q-valid counting: infeasible targets") {
  FactorGraph g = ring(ising(6, 2, 0.3));
  LocalIndex idx = local_index(g, 0);
  MarginalSequence s = uniform_sequence(idx);
  s.variables.begin()->second = Dist{1, 0};
  s.factors.begin()->second = Dist{0, 0, 0, 1};
  CHECK_THROWS_AS(count_q_valid_ratio(g, 0, s), Infeasible);
}
