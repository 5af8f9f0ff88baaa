#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/model.hpp"

namespace bethelab {

struct TemplateNode {
  bool factor = false;
  std::vector<int> clone_types;  // degree = size
  WeightPtr weight;              // constraints only
  // per clone slot: (neighbour node, neighbour's slot), or (-1,-1) when the
  // neighbour lies outside the template
  std::vector<std::pair<int, int>> adj;
};

// Rooted neighbourhood. Depth counts variable layers: a variable-rooted
// template of depth d contains every node within bipartite distance 2d, a
// constraint-rooted one of depth d every node within 2d-1.
struct Template {
  std::vector<TemplateNode> nodes;
  int root = 0;
  int q = 0;
  int depth = 0;

  bool root_is_factor() const { return nodes[static_cast<std::size_t>(root)].factor; }
  int root_degree() const { return static_cast<int>(nodes[static_cast<std::size_t>(root)].clone_types.size()); }
  bool is_tree() const;
  std::vector<int> distances() const;  // bipartite distance from the root
};

int template_radius(bool factor_root, int depth);

struct NodeRef {
  bool factor = false;
  int index = 0;
};

Template neighborhood(const FactorGraph& g, NodeRef v, int depth);
inline Template variable_neighborhood(const FactorGraph& g, int x, int depth) { return neighborhood(g, {false, x}, depth); }
inline Template factor_neighborhood(const FactorGraph& g, int a, int depth) { return neighborhood(g, {true, a}, depth); }

inline constexpr const char* kKeyVersion = "T2";

// Keys identify templates up to root-fixing isomorphisms that preserve kinds,
// clone types, weights and slot-wise adjacency, where clones of a node may be
// permuted when the permutation is a symmetry of the node (same clone type,
// and for constraints the weight table is invariant). Tree templates get the
// symmetric form; templates containing a cycle fall back to the rigid
// slot-ordered form, which is finer but still a function of the class.
struct KeyInfo {
  std::string key;
  // token of the branch behind each root slot ("." when absent); clones with
  // equal tokens are interchangeable
  std::vector<std::string> slot_tokens;
  // canonical position -> root slot
  std::vector<int> canon;
};

KeyInfo key_info(const Template& t);
inline std::string canonical_key(const Template& t) { return key_info(t).key; }
// Strict slot-ordered serialisation, no symmetry reduction.
std::string rigid_key(const Template& t);

// Token of a tree node from its children's tokens ("^" marks the parent slot,
// "." an absent neighbour). Fills canon with the canonical slot order.
std::string node_token(bool factor, const WeightFunction* w, const std::vector<int>& types, const std::vector<std::string>& slot_tokens,
                       std::vector<int>* canon = nullptr);
std::string tree_key_prefix();

// Move the root to the neighbour attached to root slot j.
Template reroot(const Template& t, int j);
// Slot of the new root that leads back to the old root.
int reroot_back_slot(const Template& t, int j);

// Restrict to the given depth around the current root.
Template truncate(const Template& t, int depth);

}  // namespace bethelab
