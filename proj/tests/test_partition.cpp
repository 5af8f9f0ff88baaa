#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bethelab/errors.hpp"
#include "bethelab/families.hpp"
#include "bethelab/partition.hpp"

using namespace bethelab;

TEST_CASE("walk_assignments visits Omega^n in lexicographic order with correct table indices") {
  FactorGraph g = sample_graph(potts(4, 3, 3, 0.5), 8);
  std::size_t count = 0;
  walk_assignments(g, kDefaultAssignmentCap, [&](std::size_t idx, const std::vector<int>& s, const std::vector<std::size_t>& fidx, double lw) {
    CHECK(idx == count++);
    std::size_t back = 0;
    for (int v : s) back = back * 3 + static_cast<std::size_t>(v);
    CHECK(back == idx);
    for (int a = 0; a < g.m(); ++a) {
      std::vector<int> args{s[static_cast<std::size_t>(g.var_at(a, 0))], s[static_cast<std::size_t>(g.var_at(a, 1))]};
      CHECK(fidx[static_cast<std::size_t>(a)] == g.model().weight_of(a).index_of(args));
    }
    CHECK(lw == doctest::Approx(log_weight(g, s)).epsilon(1e-13));
  });
  CHECK(count == 81);
}

TEST_CASE("log-sum accumulator") {
  LogSum s;
  CHECK(std::isinf(s.value()));
  s.add(-std::numeric_limits<double>::infinity());
  CHECK(std::isinf(s.value()));
  s.add(1000.0);
  s.add(1000.0);
  CHECK(s.value() == doctest::Approx(1000.0 + std::log(2.0)));
  s.add(-1e6);
  CHECK(s.value() == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("log-domain partition function survives direct overflow") {
  // beta large enough that e^(beta m) overflows a double
  FactorGraph g = sample_graph(ising(4, 2, 200.0), 1);
  PartitionFunction z = partition_function_exact(g);
  CHECK(std::isfinite(z.log_z));
  CHECK(z.log_z >= 4 * 200.0);
  CHECK(z.log_z <= 4 * 200.0 + std::log(16.0));
}

TEST_CASE("weight and log_weight agree and reject bad lengths") {
  FactorGraph g = sample_graph(ising(6, 3, 0.4), 3);
  const std::vector<int> s{0, 1, 1, 0, 1, 1};
  CHECK(weight(g, s) == doctest::Approx(std::exp(log_weight(g, s))));
  CHECK_THROWS_AS(log_weight(g, {0, 1}), std::invalid_argument);
}

TEST_CASE("saturating budget arithmetic") {
  CHECK(saturating_pow(2, 10) == 1024);
  CHECK(saturating_pow(3, 100) == UINT64_MAX);
  CHECK_NOTHROW(check_budget("x", 5, 5));
  CHECK_THROWS_AS(check_budget("x", 6, 5), BudgetExceeded);
  try {
    check_budget("thing", 7, 3);
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() == 7);
    CHECK(e.cap() == 3);
  }
}
