#include "bethelab/families.hpp"

#include <stdexcept>

namespace bethelab {

FamilySpec parse_family(const std::string& name, int d, int k, double beta, int positive, int negative) {
  if (name != "ising" && name != "potts" && name != "ksat") throw std::invalid_argument("unsupported model family '" + name + "'");
  return FamilySpec{name, d, k, beta, positive, negative};
}

ModelPtr make_model(const FamilySpec& f, int n, std::uint64_t seed) {
  if (f.name == "ising") return ising(n, f.d, f.beta);
  if (f.name == "potts") return potts(n, f.d, f.k, f.beta);
  if (f.name == "ksat") return ksat_regular(n, f.k, f.beta, f.positive, f.negative, seed);
  throw std::invalid_argument("unsupported model family '" + f.name + "'");
}

BranchingLaw make_law(const FamilySpec& f) {
  if (f.name == "ising") return ising_law(f.d, f.beta);
  if (f.name == "potts") return potts_law(f.d, f.k, f.beta);
  if (f.name == "ksat") return ksat_law(f.k, f.beta, {{{f.positive, f.negative}, 1.0}});
  throw std::invalid_argument("unsupported model family '" + f.name + "'");
}

bool admissible_size(const FamilySpec& f, int n) {
  if (n < 1) return false;
  if (f.name == "ksat") return (n * (f.positive + f.negative)) % f.k == 0;
  return (n * f.d) % 2 == 0;
}

FactorGraph ring(const ModelPtr& model) {
  const int n = model->n();
  if (model->m() != n) throw std::invalid_argument("ring: needs as many constraints as variables");
  for (int x = 0; x < n; ++x)
    if (model->var_degree(x) != 2 || model->factor_degree(x) != 2) throw std::invalid_argument("ring: every node must have degree 2");
  std::vector<int> partner(static_cast<std::size_t>(model->num_clones()));
  for (int x = 0; x < n; ++x) {
    partner[static_cast<std::size_t>(model->var_clone(x, 1))] = model->factor_clone(x, 0);
    partner[static_cast<std::size_t>(model->var_clone((x + 1) % n, 0))] = model->factor_clone(x, 1);
  }
  return FactorGraph(model, std::move(partner));
}

}  // namespace bethelab
