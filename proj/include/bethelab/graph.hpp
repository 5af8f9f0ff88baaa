#pragma once

#include <climits>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "bethelab/model.hpp"

namespace bethelab {

// Type-preserving bijection between variable clones and constraint clones.
class FactorGraph {
 public:
  // partner[c] = constraint clone matched to variable clone c.
  FactorGraph(ModelPtr model, std::vector<int> partner);

  const Model& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  int n() const { return model_->n(); }
  int m() const { return model_->m(); }
  int q() const { return model_->q(); }

  const std::vector<int>& matching() const { return partner_; }
  int factor_clone_of(int var_clone) const { return partner_[static_cast<std::size_t>(var_clone)]; }
  int var_clone_of(int factor_clone) const { return inverse_[static_cast<std::size_t>(factor_clone)]; }

  // (a, j) attached to clone i of variable x
  std::pair<int, int> factor_neighbor(int x, int i) const {
    return model_->factor_clone_owner(factor_clone_of(model_->var_clone(x, i)));
  }
  // (x, i) attached to slot j of constraint a
  std::pair<int, int> var_neighbor(int a, int j) const {
    return model_->var_clone_owner(var_clone_of(model_->factor_clone(a, j)));
  }
  int var_at(int a, int j) const { return var_neighbor(a, j).first; }

 private:
  ModelPtr model_;
  std::vector<int> partner_, inverse_;
};

// Uniform type-preserving matching. Each type class is shuffled with its own
// named stream derived from `seed`.
FactorGraph sample_graph(const ModelPtr& model, std::uint64_t seed);

// Uniform matching in which variable clone c may only meet constraint clone f
// when var_class[c] == factor_class[f]; classes must be balanced.
FactorGraph sample_matching(const ModelPtr& model, const std::vector<int>& var_class,
                            const std::vector<int>& factor_class, std::uint64_t seed, const char* stream);

// Number of variable clones whose partner differs.
int dist(const FactorGraph& a, const FactorGraph& b);

inline constexpr int kNoCycle = INT_MAX;

// Fewest constraint nodes on any cycle of the bipartite multigraph (a
// constraint holding two clones of one variable gives 1); kNoCycle if none.
int shortest_cycle(const FactorGraph& g);
bool is_l_acyclic(const FactorGraph& g, int l);

ModelPtr tensor_model(const Model& m);
FactorGraph tensor_graph(const FactorGraph& g);

}  // namespace bethelab
