#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "bethelab/families.hpp"
#include "bethelab/fixtures.hpp"
#include "bethelab/io.hpp"

using namespace bethelab;

TEST_CASE("measure round trip") {
  DenseMeasure mu = fixtures::mixture(5);
  DenseMeasure back = measure_from_json(json::parse(to_json(mu).dump()));
  REQUIRE(back.size() == mu.size());
  CHECK(back.alphabet().symbols == mu.alphabet().symbols);
  for (std::size_t i = 0; i < mu.size(); ++i) CHECK(back[i] == doctest::Approx(mu[i]).epsilon(1e-15));
  json bad = to_json(mu);
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(measure_from_json(bad), std::invalid_argument);
}

TEST_CASE("model and graph round trip") {
  for (ModelPtr m : {ising(8, 3, 0.4), potts(6, 3, 4, 0.2), ksat_regular(9, 3, 1.1, 2, 1, 4)}) {
    ModelPtr back = Model::create(model_spec_from_json(json::parse(to_json(m->spec()).dump())));
    CHECK(same_structure(*m, *back));
    for (int a = 0; a < m->m(); ++a) CHECK(back->weight_of(a).table() == m->weight_of(a).table());
    FactorGraph g = sample_graph(m, 3);
    FactorGraph h = graph_from_json(back, json::parse(to_json(g).dump()));
    CHECK(h.matching() == g.matching());
  }
}

TEST_CASE("graph json must be a perfect matching") {
  ModelPtr m = ising(4, 2, 0.1);
  json j = to_json(sample_graph(m, 0));
  j["clone_pairs"][0][1] = j["clone_pairs"][1][1];
  CHECK_THROWS_AS(graph_from_json(m, j), std::invalid_argument);
}

TEST_CASE("marginal assignment round trip") {
  MarginalAssignment p = build_marginal_assignment(limit_tree(ising_law(3, 0.7), 2), 1, 1);
  MarginalAssignment back = marginal_assignment_from_json(json::parse(to_json(p).dump()));
  CHECK(back.depth == p.depth);
  CHECK(back.variables == p.variables);
  CHECK(back.factors.size() == p.factors.size());
  CHECK(back.factor_slots == p.factor_slots);
}

TEST_CASE("file helpers") {
  const std::string path = "io_roundtrip_tmp.json";
  write_json_file(path, to_json(fixtures::product(Alphabet::spins(), 3, {0.25, 0.75})));
  DenseMeasure mu = measure_from_json(read_json_file(path));
  CHECK(mu.marginal(2)[1] == doctest::Approx(0.75));
  std::remove(path.c_str());
  CHECK_THROWS(read_json_file("no/such/file.json"));
}
