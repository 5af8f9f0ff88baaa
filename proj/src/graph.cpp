#include "bethelab/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>

#include "bethelab/rng.hpp"
#include "bethelab/states.hpp"

namespace bethelab {

FactorGraph::FactorGraph(ModelPtr model, std::vector<int> partner) : model_(std::move(model)), partner_(std::move(partner)) {
  if (!model_) throw std::invalid_argument("factor graph needs a model");
  const int C = model_->num_clones();
  if (static_cast<int>(partner_.size()) != C) throw std::invalid_argument("matching has wrong length");
  inverse_.assign(static_cast<std::size_t>(C), -1);
  for (int c = 0; c < C; ++c) {
    const int f = partner_[static_cast<std::size_t>(c)];
    if (f < 0 || f >= C) throw std::invalid_argument("matching entry out of range");
    if (inverse_[static_cast<std::size_t>(f)] != -1) throw std::invalid_argument("matching is not a bijection");
    if (model_->var_clone_type(c) != model_->factor_clone_type(f))
      throw std::invalid_argument("matching joins clones of different types");
    inverse_[static_cast<std::size_t>(f)] = c;
  }
}

FactorGraph sample_matching(const ModelPtr& model, const std::vector<int>& var_class,
                            const std::vector<int>& factor_class, std::uint64_t seed, const char* stream) {
  const int C = model->num_clones();
  if (static_cast<int>(var_class.size()) != C || static_cast<int>(factor_class.size()) != C)
    throw std::invalid_argument("class vectors have wrong length");
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
  for (int c = 0; c < C; ++c) groups[var_class[static_cast<std::size_t>(c)]].first.push_back(c);
  for (int f = 0; f < C; ++f) groups[factor_class[static_cast<std::size_t>(f)]].second.push_back(f);
  std::vector<int> partner(static_cast<std::size_t>(C), -1);
  for (auto& [cls, g] : groups) {
    if (g.first.size() != g.second.size())
      throw std::invalid_argument("clone class " + std::to_string(cls) + " is unbalanced");
    Rng rng(seed, std::string(stream) + "/class=" + std::to_string(cls));
    rng.shuffle(g.second);
    for (std::size_t i = 0; i < g.first.size(); ++i) partner[static_cast<std::size_t>(g.first[i])] = g.second[i];
  }
  return FactorGraph(model, std::move(partner));
}

FactorGraph sample_graph(const ModelPtr& model, std::uint64_t seed) {
  const int C = model->num_clones();
  std::vector<int> vc(static_cast<std::size_t>(C)), fc(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    vc[static_cast<std::size_t>(c)] = model->var_clone_type(c);
    fc[static_cast<std::size_t>(c)] = model->factor_clone_type(c);
  }
  return sample_matching(model, vc, fc, seed, "match/type");
}

int dist(const FactorGraph& a, const FactorGraph& b) {
  if (!same_structure(a.model(), b.model())) throw std::invalid_argument("dist: graphs come from different models");
  int d = 0;
  for (std::size_t c = 0; c < a.matching().size(); ++c) d += a.matching()[c] != b.matching()[c];
  return d;
}

int shortest_cycle(const FactorGraph& g) {
  // Bipartite multigraph: nodes 0..n-1 variables, n..n+m-1 constraints; one
  // edge per clone pair. BFS from every node; a non-tree edge closes a cycle of
  // length dist[u] + dist[v] + 1, and the minimum over all roots is the girth.
  const Model& M = g.model();
  const int n = M.n(), N = n + M.m(), C = M.num_clones();
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(N));  // (neighbour, edge id)
  for (int c = 0; c < C; ++c) {
    auto [x, i] = M.var_clone_owner(c);
    auto [a, j] = M.factor_clone_owner(g.factor_clone_of(c));
    adj[static_cast<std::size_t>(x)].emplace_back(n + a, c);
    adj[static_cast<std::size_t>(n + a)].emplace_back(x, c);
  }
  int best = kNoCycle;
  std::vector<int> dist(static_cast<std::size_t>(N)), via(static_cast<std::size_t>(N));
  for (int s = 0; s < N; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    via[static_cast<std::size_t>(s)] = -1;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (best != kNoCycle && 2 * dist[static_cast<std::size_t>(u)] >= best) break;
      for (auto [v, e] : adj[static_cast<std::size_t>(u)]) {
        if (e == via[static_cast<std::size_t>(u)]) continue;
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          via[static_cast<std::size_t>(v)] = e;
          queue.push_back(v);
        } else {
          best = std::min(best, dist[static_cast<std::size_t>(u)] + dist[static_cast<std::size_t>(v)] + 1);
        }
      }
    }
  }
  return best == kNoCycle ? kNoCycle : best / 2;
}

bool is_l_acyclic(const FactorGraph& g, int l) { return shortest_cycle(g) > l; }

ModelPtr tensor_model(const Model& m) {
  ModelSpec s = m.spec();
  s.family = "tensor[" + s.family + "]";
  s.alphabet = tensor_alphabet(m.spec().alphabet);
  const int q = m.q();
  for (WeightPtr& w : s.weights) {
    const int h = w->arity();
    std::vector<double> t(checked_pow(q * q, h));
    for_each_assignment(q * q, h, [&](std::size_t idx, const std::vector<int>& pairs) {
      std::size_t i1 = 0, i2 = 0;
      for (int p : pairs) {
        i1 = i1 * static_cast<std::size_t>(q) + static_cast<std::size_t>(p / q);
        i2 = i2 * static_cast<std::size_t>(q) + static_cast<std::size_t>(p % q);
      }
      t[idx] = w->at(i1) * w->at(i2);
    });
    w = std::make_shared<WeightFunction>("tensor[" + w->id() + "]", q * q, h, std::move(t));
  }
  return Model::create(std::move(s));
}

FactorGraph tensor_graph(const FactorGraph& g) { return FactorGraph(tensor_model(g.model()), g.matching()); }

}  // namespace bethelab
