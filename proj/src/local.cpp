#include "bethelab/local.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>

#include "bethelab/rng.hpp"

namespace bethelab {

double LocalDistribution::variable_share() const {
  double s = 0;
  for (const auto& [k, e] : entries)
    if (!e.representative.root_is_factor()) s += e.weight;
  return s;
}

double LocalDistribution::factor_share() const {
  double s = 0;
  for (const auto& [k, e] : entries)
    if (e.representative.root_is_factor()) s += e.weight;
  return s;
}

double LocalDistribution::weight(const std::string& key) const {
  auto it = entries.find(key);
  return it == entries.end() ? 0.0 : it->second.weight;
}

LocalDistribution local_distribution(const FactorGraph& g, int depth) {
  LocalDistribution out;
  out.depth = depth;
  out.mode = "empirical";
  const double total = g.n() + g.m();
  auto add = [&](Template t) {
    std::string key = canonical_key(t);
    auto [it, inserted] = out.entries.try_emplace(key);
    if (inserted) it->second.representative = std::move(t);
    it->second.weight += 1.0 / total;
  };
  for (int x = 0; x < g.n(); ++x) add(variable_neighborhood(g, x, depth));
  for (int a = 0; a < g.m(); ++a) add(factor_neighborhood(g, a, depth + 1));
  return out;
}

double tv_to(const LocalDistribution& a, const LocalDistribution& b) {
  if (a.depth != b.depth) throw std::invalid_argument("tv_to: local distributions have different depths");
  double s = 0;
  for (const auto& [k, e] : a.entries) s += std::fabs(e.weight - b.weight(k));
  for (const auto& [k, e] : b.entries)
    if (!a.entries.count(k)) s += e.weight;
  return 0.5 * s;
}

namespace {

std::string factor_kind_key(const FactorKind& f) {
  std::string s = f.weight->id() + "|";
  for (int t : f.clone_types) s += std::to_string(t) + ",";
  return s;
}

}  // namespace

BranchingLaw branching_law(const Model& m) {
  BranchingLaw law;
  law.family = m.spec().family;
  law.q = m.q();
  const double n = m.n(), nf = m.m();
  law.factors_per_variable = nf / n;
  std::map<std::vector<int>, double> vroots;
  for (const auto& t : m.spec().variables) vroots[t] += 1.0 / n;
  for (auto& [t, p] : vroots) law.root_variables.push_back({VarKind{t}, p});
  std::map<std::string, std::pair<FactorKind, double>> froots;
  for (int a = 0; a < m.m(); ++a) {
    FactorKind fk{m.weight_ptr_of(a), m.spec().factors[static_cast<std::size_t>(a)].clone_types};
    auto& e = froots[factor_kind_key(fk)];
    e.first = fk;
    e.second += 1.0 / nf;
  }
  for (auto& [k, e] : froots) law.root_factors.push_back(e);

  std::map<int, double> type_count;
  for (int c = 0; c < m.num_clones(); ++c) type_count[m.var_clone_type(c)] += 1;
  std::map<int, std::map<std::pair<std::vector<int>, int>, double>> vgiven;
  for (int c = 0; c < m.num_clones(); ++c) {
    auto [x, i] = m.var_clone_owner(c);
    const int th = m.var_clone_type(c);
    vgiven[th][{m.spec().variables[static_cast<std::size_t>(x)], i}] += 1.0 / type_count[th];
  }
  for (auto& [th, mp] : vgiven)
    for (auto& [ki, p] : mp) law.variable_given_type[th].emplace_back(VarKind{ki.first}, ki.second, p);
  std::map<int, std::map<std::pair<std::string, int>, std::pair<FactorKind, double>>> fgiven;
  for (int c = 0; c < m.num_clones(); ++c) {
    auto [a, j] = m.factor_clone_owner(c);
    const int th = m.factor_clone_type(c);
    FactorKind fk{m.weight_ptr_of(a), m.spec().factors[static_cast<std::size_t>(a)].clone_types};
    auto& e = fgiven[th][{factor_kind_key(fk), j}];
    e.first = fk;
    e.second += 1.0 / type_count[th];
  }
  for (auto& [th, mp] : fgiven)
    for (auto& [kj, e] : mp) law.factor_given_type[th].emplace_back(e.first, kj.second, e.second);
  return law;
}

BranchingLaw ising_law(int d, double beta) {
  BranchingLaw l = branching_law(*ising(d % 2 ? 2 : 1, d, beta));
  l.family = "ising(d=" + std::to_string(d) + ",beta=" + format_param(beta) + ")";
  return l;
}

BranchingLaw potts_law(int d, int k, double beta) {
  BranchingLaw l = branching_law(*potts(d % 2 ? 2 : 1, d, k, beta));
  l.family = "potts(d=" + std::to_string(d) + ",k=" + std::to_string(k) + ",beta=" + format_param(beta) + ")";
  return l;
}

BranchingLaw ksat_law(int k, double beta, const std::vector<std::pair<std::pair<int, int>, double>>& dd) {
  if (k < 1) throw std::invalid_argument("ksat_law: k must be positive");
  if (dd.empty()) throw std::invalid_argument("ksat_law: empty degree distribution");
  BranchingLaw law;
  law.family = "ksat(k=" + std::to_string(k) + ",beta=" + format_param(beta) + ")";
  law.q = 2;
  double total = 0, ep = 0, em = 0;
  for (auto [d, p] : dd) {
    if (p < 0 || d.first < 0 || d.second < 0 || d.first + d.second < 1) throw std::invalid_argument("ksat_law: bad degree entry");
    total += p;
  }
  if (!(total > 0)) throw std::invalid_argument("ksat_law: degree distribution has no mass");
  for (auto [d, p] : dd) {
    ep += p / total * d.first;
    em += p / total * d.second;
  }
  law.factors_per_variable = (ep + em) / k;
  const double p_plus = ep / (ep + em);
  for (auto [d, p] : dd) {
    std::vector<int> t(static_cast<std::size_t>(d.first), 1);
    t.insert(t.end(), static_cast<std::size_t>(d.second), -1);
    law.root_variables.push_back({VarKind{t}, p / total});
    for (int i = 0; i < d.first + d.second; ++i) {
      const int th = t[static_cast<std::size_t>(i)];
      law.variable_given_type[th].emplace_back(VarKind{t}, i, p / total / (th > 0 ? ep : em));
    }
  }
  for_each_assignment(2, k, [&](std::size_t, const std::vector<int>& v) {
    std::vector<int> signs;
    double p = 1;
    for (int b : v) {
      signs.push_back(spin_of(b));
      p *= b ? p_plus : 1 - p_plus;
    }
    if (!(p > 0)) return;
    FactorKind fk{ksat_weight(signs, beta), signs};
    law.root_factors.push_back({fk, p});
    for (int j = 0; j < k; ++j) {
      const int th = signs[static_cast<std::size_t>(j)];
      law.factor_given_type[th].emplace_back(fk, j, p / (k * (th > 0 ? p_plus : 1 - p_plus)) );
    }
  });
  return law;
}

namespace {

struct TreeNode {
  bool factor = false;
  std::vector<int> types;
  WeightPtr weight;
  int parent_slot = -1;
  std::vector<std::shared_ptr<const TreeNode>> kids;
  std::string token;  // as seen from the parent
};
using TreePtr = std::shared_ptr<const TreeNode>;
using Options = std::vector<std::pair<TreePtr, double>>;

struct TooMany {};

void seal(TreeNode& n) {
  std::vector<std::string> toks(n.types.size());
  for (std::size_t s = 0; s < n.types.size(); ++s) {
    if (static_cast<int>(s) == n.parent_slot)
      toks[s] = "^";
    else if (s < n.kids.size() && n.kids[s])
      toks[s] = n.kids[s]->token;
    else
      toks[s] = ".";
  }
  n.token = node_token(n.factor, n.weight.get(), n.types, toks);
}

// Children with equal tokens are interchangeable for every key above them,
// so options are merged by token.
Options merged(const std::vector<std::pair<TreePtr, double>>& in) {
  std::map<std::string, std::pair<TreePtr, double>> by;
  for (const auto& [t, p] : in) {
    auto [it, ins] = by.try_emplace(t->token, t, 0.0);
    it->second.second += p;
  }
  Options out;
  for (auto& [k, e] : by) out.push_back(e);
  return out;
}

struct Enumerator {
  const BranchingLaw& law;
  int radius;
  std::size_t cap;

  Options expand(TreeNode base, int dist) {
    std::vector<Options> per_slot(base.types.size());
    for (std::size_t s = 0; s < base.types.size(); ++s) {
      if (static_cast<int>(s) == base.parent_slot || dist >= radius) continue;
      per_slot[s] = children(base.factor, base.types[s], dist + 1);
    }
    std::vector<std::pair<std::vector<TreePtr>, double>> combos{{std::vector<TreePtr>(base.types.size()), 1.0}};
    for (std::size_t s = 0; s < base.types.size(); ++s) {
      if (per_slot[s].empty()) continue;
      std::vector<std::pair<std::vector<TreePtr>, double>> next;
      for (const auto& [kids, p] : combos)
        for (const auto& [child, pc] : per_slot[s]) {
          auto k2 = kids;
          k2[s] = child;
          next.emplace_back(std::move(k2), p * pc);
          if (next.size() > cap) throw TooMany{};
        }
      combos = std::move(next);
    }
    Options out;
    for (auto& [kids, p] : combos) {
      auto node = std::make_shared<TreeNode>(base);
      node->kids = std::move(kids);
      seal(*node);
      out.emplace_back(node, p);
    }
    return merged(out);
  }

  // Offspring attached through a clone of type th of a node of the given kind.
  Options children(bool parent_is_factor, int th, int dist) {
    Options out;
    if (parent_is_factor) {
      auto it = law.variable_given_type.find(th);
      if (it == law.variable_given_type.end()) throw std::invalid_argument("branching law has no variable clone of type " + std::to_string(th));
      for (const auto& [vk, slot, p] : it->second) {
        TreeNode b;
        b.types = vk.clone_types;
        b.parent_slot = slot;
        for (auto& [t, pt] : expand(b, dist)) out.emplace_back(t, p * pt);
      }
    } else {
      auto it = law.factor_given_type.find(th);
      if (it == law.factor_given_type.end()) throw std::invalid_argument("branching law has no constraint clone of type " + std::to_string(th));
      for (const auto& [fk, slot, p] : it->second) {
        TreeNode b;
        b.factor = true;
        b.types = fk.clone_types;
        b.weight = fk.weight;
        b.parent_slot = slot;
        for (auto& [t, pt] : expand(b, dist)) out.emplace_back(t, p * pt);
      }
    }
    out = merged(out);
    if (out.size() > cap) throw TooMany{};
    return out;
  }
};

struct Sampler {
  const BranchingLaw& law;
  int radius;
  Rng& rng;

  template <class T>
  const T& pick(const std::vector<T>& v, std::function<double(const T&)> prob) {
    double u = rng.uniform(), acc = 0;
    for (const T& e : v) {
      acc += prob(e);
      if (u < acc) return e;
    }
    return v.back();
  }

  TreePtr grow(TreeNode base, int dist) {
    base.kids.assign(base.types.size(), nullptr);
    if (dist < radius)
      for (std::size_t s = 0; s < base.types.size(); ++s) {
        if (static_cast<int>(s) == base.parent_slot) continue;
        TreeNode c;
        if (base.factor) {
          const auto& [vk, slot, p] = pick<std::tuple<VarKind, int, double>>(
              law.variable_given_type.at(base.types[s]), [](const auto& e) { return std::get<2>(e); });
          c.types = vk.clone_types;
          c.parent_slot = slot;
        } else {
          const auto& [fk, slot, p] = pick<std::tuple<FactorKind, int, double>>(
              law.factor_given_type.at(base.types[s]), [](const auto& e) { return std::get<2>(e); });
          c.factor = true;
          c.types = fk.clone_types;
          c.weight = fk.weight;
          c.parent_slot = slot;
        }
        base.kids[s] = grow(std::move(c), dist + 1);
      }
    seal(base);
    return std::make_shared<TreeNode>(std::move(base));
  }
};

Template to_template(const TreePtr& root, int q, int depth) {
  Template t;
  t.q = q;
  t.depth = depth;
  t.root = 0;
  std::function<int(const TreePtr&)> add = [&](const TreePtr& u) -> int {
    const int id = static_cast<int>(t.nodes.size());
    TemplateNode node;
    node.factor = u->factor;
    node.clone_types = u->types;
    node.weight = u->weight;
    node.adj.assign(u->types.size(), {-1, -1});
    t.nodes.push_back(std::move(node));
    for (std::size_t s = 0; s < u->kids.size(); ++s) {
      if (!u->kids[s]) continue;
      const int c = add(u->kids[s]);
      const int cs = u->kids[s]->parent_slot;
      t.nodes[static_cast<std::size_t>(id)].adj[s] = {c, cs};
      t.nodes[static_cast<std::size_t>(c)].adj[static_cast<std::size_t>(cs)] = {id, static_cast<int>(s)};
    }
    return id;
  };
  add(root);
  return t;
}

}  // namespace

LocalDistribution limit_tree(const BranchingLaw& law, int depth, const LimitOptions& opt) {
  if (depth < 0) throw std::invalid_argument("limit_tree: depth must be non-negative");
  if (law.root_variables.empty()) throw std::invalid_argument("limit_tree: law has no variables");
  LocalDistribution out;
  out.depth = depth;
  const double pv = 1.0 / (1.0 + law.factors_per_variable), pf = 1.0 - pv;
  const int rv = template_radius(false, depth), rf = template_radius(true, depth + 1);

  auto accumulate = [&](const TreePtr& t, double w, int d) {
    auto [it, ins] = out.entries.try_emplace(tree_key_prefix() + t->token);
    if (ins) it->second.representative = to_template(t, law.q, d);
    it->second.weight += w;
  };

  try {
    Enumerator ev{law, rv, opt.max_trees}, ef{law, rf, opt.max_trees};
    std::vector<std::pair<TreePtr, double>> vt, ft;
    for (const auto& [vk, p] : law.root_variables) {
      TreeNode b;
      b.types = vk.clone_types;
      for (auto& [t, pt] : ev.expand(b, 0)) vt.emplace_back(t, p * pt);
      if (vt.size() > opt.max_trees) throw TooMany{};
    }
    for (const auto& [fk, p] : law.root_factors) {
      TreeNode b;
      b.factor = true;
      b.types = fk.clone_types;
      b.weight = fk.weight;
      for (auto& [t, pt] : ef.expand(b, 0)) ft.emplace_back(t, p * pt);
      if (ft.size() > opt.max_trees) throw TooMany{};
    }
    for (auto& [t, p] : vt) accumulate(t, pv * p, depth);
    for (auto& [t, p] : ft) accumulate(t, pf * p, depth + 1);
    out.mode = "exact";
    return out;
  } catch (const TooMany&) {
    if (!opt.allow_sampling) throw std::invalid_argument("limit_tree: exact enumeration exceeds the cap");
  }
  out.entries.clear();
  out.mode = "sampled";
  out.samples = opt.samples;
  out.seed = opt.seed;
  Rng rng(opt.seed, "limit_tree");
  Sampler sv{law, rv, rng}, sf{law, rf, rng};
  for (std::uint64_t s = 0; s < opt.samples; ++s) {
    const auto& [vk, p] = sv.pick<std::pair<VarKind, double>>(law.root_variables, [](const auto& e) { return e.second; });
    TreeNode b;
    b.types = vk.clone_types;
    accumulate(sv.grow(b, 0), pv / static_cast<double>(opt.samples), depth);
    const auto& [fk, pfk] = sf.pick<std::pair<FactorKind, double>>(law.root_factors, [](const auto& e) { return e.second; });
    TreeNode c;
    c.factor = true;
    c.types = fk.clone_types;
    c.weight = fk.weight;
    accumulate(sf.grow(c, 0), pf / static_cast<double>(opt.samples), depth + 1);
  }
  return out;
}

}  // namespace bethelab
