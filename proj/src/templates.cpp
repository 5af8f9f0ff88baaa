#include "bethelab/templates.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>

namespace bethelab {

int template_radius(bool factor_root, int depth) {
  if (depth < 0) throw std::invalid_argument("template depth must be non-negative");
  if (factor_root) {
    if (depth < 1) throw std::invalid_argument("constraint-rooted templates need depth >= 1");
    return 2 * depth - 1;
  }
  return 2 * depth;
}

bool Template::is_tree() const {
  std::size_t half_edges = 0;
  for (const TemplateNode& v : nodes)
    for (auto [w, s] : v.adj)
      if (w >= 0) ++half_edges;
  return half_edges / 2 + 1 == nodes.size();
}

std::vector<int> Template::distances() const {
  std::vector<int> d(nodes.size(), -1);
  d[static_cast<std::size_t>(root)] = 0;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (auto [w, s] : nodes[static_cast<std::size_t>(u)].adj)
      if (w >= 0 && d[static_cast<std::size_t>(w)] < 0) {
        d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(u)] + 1;
        queue.push_back(w);
      }
  }
  return d;
}

Template neighborhood(const FactorGraph& g, NodeRef v, int depth) {
  const Model& M = g.model();
  const int n = M.n();
  const int radius = template_radius(v.factor, depth);
  if (v.index < 0 || v.index >= (v.factor ? M.m() : n)) throw std::invalid_argument("neighborhood: node out of range");
  auto gid = [n](NodeRef r) { return r.factor ? n + r.index : r.index; };
  std::vector<int> dist(static_cast<std::size_t>(n + M.m()), -1), local(static_cast<std::size_t>(n + M.m()), -1);
  std::vector<NodeRef> order;
  dist[static_cast<std::size_t>(gid(v))] = 0;
  order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head) {
    NodeRef u = order[head];
    const int du = dist[static_cast<std::size_t>(gid(u))];
    if (du == radius) continue;
    const int deg = u.factor ? M.factor_degree(u.index) : M.var_degree(u.index);
    for (int s = 0; s < deg; ++s) {
      NodeRef w = u.factor ? NodeRef{false, g.var_neighbor(u.index, s).first} : NodeRef{true, g.factor_neighbor(u.index, s).first};
      if (dist[static_cast<std::size_t>(gid(w))] < 0) {
        dist[static_cast<std::size_t>(gid(w))] = du + 1;
        order.push_back(w);
      }
    }
  }
  Template t;
  t.q = M.q();
  t.depth = depth;
  t.root = 0;
  for (std::size_t i = 0; i < order.size(); ++i) local[static_cast<std::size_t>(gid(order[i]))] = static_cast<int>(i);
  for (NodeRef u : order) {
    TemplateNode node;
    node.factor = u.factor;
    if (u.factor) {
      node.clone_types = M.spec().factors[static_cast<std::size_t>(u.index)].clone_types;
      node.weight = M.weight_ptr_of(u.index);
      for (int j = 0; j < M.factor_degree(u.index); ++j) {
        auto [x, i] = g.var_neighbor(u.index, j);
        int w = local[static_cast<std::size_t>(x)];
        node.adj.emplace_back(w, w >= 0 ? i : -1);
      }
    } else {
      node.clone_types = M.spec().variables[static_cast<std::size_t>(u.index)];
      for (int i = 0; i < M.var_degree(u.index); ++i) {
        auto [a, j] = g.factor_neighbor(u.index, i);
        int w = local[static_cast<std::size_t>(n + a)];
        node.adj.emplace_back(w, w >= 0 ? j : -1);
      }
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

namespace {

struct KeyWriter {
  const Template& t;
  std::vector<int> order;
  int counter = 0;
  std::string out;
  // perm[u][p] = slot written at position p of node u; empty = identity
  const std::vector<std::vector<int>>* perm = nullptr;
  const std::vector<std::vector<int>>* pos = nullptr;

  int slot_at(int u, std::size_t p) const { return perm ? (*perm)[static_cast<std::size_t>(u)][p] : static_cast<int>(p); }
  int pos_of(int u, int s) const { return pos ? (*pos)[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)] : s; }

  void node(int u, int parent_slot) {
    const TemplateNode& v = t.nodes[static_cast<std::size_t>(u)];
    order[static_cast<std::size_t>(u)] = counter++;
    if (v.factor)
      out += "F<" + v.weight->id() + ">";
    else
      out += "V";
    out += '{';
    for (std::size_t i = 0; i < v.clone_types.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(v.clone_types[static_cast<std::size_t>(slot_at(u, i))]);
    }
    out += "}(";
    for (std::size_t p = 0; p < v.adj.size(); ++p) {
      if (p) out += ',';
      const int s = slot_at(u, p);
      auto [w, ws] = v.adj[static_cast<std::size_t>(s)];
      if (w < 0)
        out += '.';
      else if (s == parent_slot)
        out += '^';
      else if (order[static_cast<std::size_t>(w)] >= 0)
        out += '@' + std::to_string(order[static_cast<std::size_t>(w)]) + '.' + std::to_string(pos_of(w, ws));
      else
        node(w, ws);
    }
    out += ')';
  }
};

// Exchange groups of a node: slots with equal clone type (and, at
// constraints, equal table class), as in node_token.
std::vector<std::vector<int>> exchange_groups(const TemplateNode& v) {
  std::vector<std::vector<int>> g;
  for (std::size_t s = 0; s < v.clone_types.size(); ++s) {
    bool placed = false;
    for (auto& grp : g) {
      const auto r = static_cast<std::size_t>(grp.front());
      if (v.clone_types[r] == v.clone_types[s] && (!v.factor || v.weight->slot_class()[r] == v.weight->slot_class()[s])) {
        grp.push_back(static_cast<int>(s));
        placed = true;
        break;
      }
    }
    if (!placed) g.push_back({static_cast<int>(s)});
  }
  return g;
}

constexpr std::uint64_t kCyclicKeyBudget = 4096;

// Smallest serialisation over all exchangeable-slot relabellings, or nothing
// if there are more than kCyclicKeyBudget of them.
std::optional<std::pair<std::string, std::vector<int>>> cyclic_key(const Template& t) {
  const std::size_t N = t.nodes.size();
  std::vector<std::vector<std::vector<int>>> groups(N);
  std::uint64_t combos = 1;
  for (std::size_t u = 0; u < N; ++u) {
    groups[u] = exchange_groups(t.nodes[u]);
    for (const auto& g : groups[u])
      for (std::size_t k = 2; k <= g.size(); ++k) {
        combos *= k;
        if (combos > kCyclicKeyBudget) return std::nullopt;
      }
  }
  std::vector<std::vector<std::vector<int>>> cur = groups;
  std::vector<std::vector<int>> perm(N), pos(N);
  std::optional<std::pair<std::string, std::vector<int>>> best;
  while (true) {
    for (std::size_t u = 0; u < N; ++u) {
      perm[u].assign(t.nodes[u].adj.size(), 0);
      // group positions are fixed; only the slots placed on them move
      for (std::size_t g = 0; g < groups[u].size(); ++g)
        for (std::size_t i = 0; i < groups[u][g].size(); ++i)
          perm[u][static_cast<std::size_t>(groups[u][g][i])] = cur[u][g][i];
      pos[u].assign(perm[u].size(), 0);
      for (std::size_t p = 0; p < perm[u].size(); ++p) pos[u][static_cast<std::size_t>(perm[u][p])] = static_cast<int>(p);
    }
    KeyWriter kw{t, std::vector<int>(N, -1), 0, std::string(kKeyVersion) + "c|", &perm, &pos};
    kw.node(t.root, -1);
    if (!best || kw.out < best->first) best.emplace(kw.out, perm[static_cast<std::size_t>(t.root)]);
    // odometer over all groups of all nodes
    bool advanced = false;
    for (std::size_t u = 0; u < N && !advanced; ++u)
      for (auto& g : cur[u]) {
        if (std::next_permutation(g.begin(), g.end())) {
          advanced = true;
          break;
        }
      }
    if (!advanced) break;
  }
  return best;
}

std::string tree_token(const Template& t, int u, int parent_slot, std::vector<std::string>* root_tokens, std::vector<int>* canon) {
  const TemplateNode& v = t.nodes[static_cast<std::size_t>(u)];
  std::vector<std::string> toks(v.adj.size());
  for (std::size_t s = 0; s < v.adj.size(); ++s) {
    auto [w, ws] = v.adj[s];
    if (w < 0)
      toks[s] = ".";
    else if (static_cast<int>(s) == parent_slot)
      toks[s] = "^";
    else
      toks[s] = tree_token(t, w, ws, nullptr, nullptr);
  }
  if (root_tokens) *root_tokens = toks;
  return node_token(v.factor, v.weight.get(), v.clone_types, toks, canon);
}

}  // namespace

std::string tree_key_prefix() { return std::string(kKeyVersion) + "s|"; }

std::string node_token(bool factor, const WeightFunction* w, const std::vector<int>& types, const std::vector<std::string>& toks,
                       std::vector<int>* canon) {
  const std::size_t d = types.size();
  if (toks.size() != d) throw std::invalid_argument("node_token: one token per slot required");
  if (factor && (!w || w->arity() != static_cast<int>(d))) throw std::invalid_argument("node_token: constraint needs a matching weight");
  // exchangeable slots: same clone type and, for constraints, same table class
  auto group = [&](std::size_t s) { return factor ? w->slot_class()[s] : 0; };
  std::vector<int> slots(d);
  for (std::size_t s = 0; s < d; ++s) slots[s] = static_cast<int>(s);
  std::vector<int> first(d);
  for (std::size_t s = 0; s < d; ++s) {
    first[s] = static_cast<int>(s);
    for (std::size_t r = 0; r < s; ++r)
      if (types[r] == types[s] && group(r) == group(s)) {
        first[s] = static_cast<int>(r);
        break;
      }
  }
  std::sort(slots.begin(), slots.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (first[ua] != first[ub]) return first[ua] < first[ub];
    if (toks[ua] != toks[ub]) return toks[ua] < toks[ub];
    return a < b;
  });
  std::string out = factor ? "F<" + w->id() + ">{" : "V{";
  for (std::size_t i = 0; i < d; ++i) {
    if (i) out += ',';
    out += std::to_string(types[i]);
  }
  out += "}(";
  for (std::size_t i = 0; i < d; ++i) {
    if (i) out += (first[static_cast<std::size_t>(slots[i])] == first[static_cast<std::size_t>(slots[i - 1])]) ? ',' : '|';
    out += toks[static_cast<std::size_t>(slots[i])];
  }
  out += ')';
  if (canon) *canon = std::move(slots);
  return out;
}

KeyInfo key_info(const Template& t) {
  if (t.nodes.empty()) throw std::invalid_argument("canonical_key: empty template");
  KeyInfo info;
  if (t.is_tree()) {
    info.key = tree_key_prefix() + tree_token(t, t.root, -1, &info.slot_tokens, &info.canon);
    return info;
  }
  const int d = t.root_degree();
  for (int s = 0; s < d; ++s)
    info.slot_tokens.push_back(t.nodes[static_cast<std::size_t>(t.root)].adj[static_cast<std::size_t>(s)].first < 0 ? "." : "*");
  if (auto c = cyclic_key(t)) {
    info.key = std::move(c->first);
    info.canon = std::move(c->second);
  } else {
    info.key = rigid_key(t);
    for (int s = 0; s < d; ++s) info.canon.push_back(s);
  }
  return info;
}

std::string rigid_key(const Template& t) {
  if (t.nodes.empty()) throw std::invalid_argument("canonical_key: empty template");
  KeyWriter kw{t, std::vector<int>(t.nodes.size(), -1), 0, std::string(kKeyVersion) + "r|"};
  kw.node(t.root, -1);
  return kw.out;
}

Template reroot(const Template& t, int j) {
  const TemplateNode& r = t.nodes[static_cast<std::size_t>(t.root)];
  if (j < 0 || j >= static_cast<int>(r.adj.size())) throw std::invalid_argument("reroot: slot out of range");
  if (r.adj[static_cast<std::size_t>(j)].first < 0) throw std::invalid_argument("reroot: slot leads outside the template");
  Template out = t;
  out.root = r.adj[static_cast<std::size_t>(j)].first;
  return out;
}

int reroot_back_slot(const Template& t, int j) {
  const TemplateNode& r = t.nodes[static_cast<std::size_t>(t.root)];
  if (j < 0 || j >= static_cast<int>(r.adj.size()) || r.adj[static_cast<std::size_t>(j)].first < 0)
    throw std::invalid_argument("reroot: slot out of range");
  return r.adj[static_cast<std::size_t>(j)].second;
}

Template truncate(const Template& t, int depth) {
  const int radius = template_radius(t.root_is_factor(), depth);
  std::vector<int> d = t.distances();
  std::vector<int> remap(t.nodes.size(), -1);
  std::vector<int> keep;
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    if (d[i] >= 0 && d[i] <= radius) keep.push_back(static_cast<int>(i));
  std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) { return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)]; });
  for (std::size_t i = 0; i < keep.size(); ++i) remap[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  Template out;
  out.q = t.q;
  out.depth = depth;
  out.root = remap[static_cast<std::size_t>(t.root)];
  for (int u : keep) {
    TemplateNode node = t.nodes[static_cast<std::size_t>(u)];
    for (auto& [w, s] : node.adj) {
      if (w >= 0 && remap[static_cast<std::size_t>(w)] >= 0) {
        w = remap[static_cast<std::size_t>(w)];
      } else {
        w = -1;
        s = -1;
      }
    }
    out.nodes.push_back(std::move(node));
  }
  return out;
}

}  // namespace bethelab
