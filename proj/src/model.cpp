#include "bethelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bethelab/rng.hpp"

namespace bethelab {

WeightFunction::WeightFunction(std::string id, int q, int arity, std::vector<double> table)
    : id_(std::move(id)), q_(q), arity_(arity), table_(std::move(table)) {
  if (q_ < 1 || arity_ < 1) throw std::invalid_argument("weight function needs q >= 1 and arity >= 1");
  if (table_.size() != checked_pow(q_, arity_)) throw std::invalid_argument("weight table has wrong size for " + id_);
  for (double v : table_)
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument("weight function " + id_ + " must be strictly positive and finite");
  log_table_.resize(table_.size());
  for (std::size_t i = 0; i < table_.size(); ++i) log_table_[i] = std::log(table_[i]);
  // union-find over transpositions that fix the table; the transpositions
  // inside a component generate its full symmetric group
  slot_class_.resize(static_cast<std::size_t>(arity_));
  for (int j = 0; j < arity_; ++j) slot_class_[static_cast<std::size_t>(j)] = j;
  std::function<int(int)> find = [&](int j) {
    return slot_class_[static_cast<std::size_t>(j)] == j ? j : find(slot_class_[static_cast<std::size_t>(j)]);
  };
  std::vector<int> v(static_cast<std::size_t>(arity_));
  for (int a = 0; a < arity_; ++a)
    for (int b = a + 1; b < arity_; ++b) {
      if (find(a) == find(b)) continue;
      bool sym = true;
      for (std::size_t idx = 0; idx < table_.size() && sym; ++idx) {
        std::size_t r = idx;
        for (int j = arity_ - 1; j >= 0; --j) {
          v[static_cast<std::size_t>(j)] = static_cast<int>(r % static_cast<std::size_t>(q_));
          r /= static_cast<std::size_t>(q_);
        }
        std::swap(v[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(b)]);
        if (table_[index_of(v)] != table_[idx]) sym = false;
      }
      if (sym) slot_class_[static_cast<std::size_t>(find(b))] = find(a);
    }
  std::vector<int> root(static_cast<std::size_t>(arity_));
  for (int j = 0; j < arity_; ++j) root[static_cast<std::size_t>(j)] = find(j);
  for (int j = 0; j < arity_; ++j)
    slot_class_[static_cast<std::size_t>(j)] =
        static_cast<int>(std::find(root.begin(), root.end(), root[static_cast<std::size_t>(j)]) - root.begin());
}

std::size_t WeightFunction::index_of(const std::vector<int>& values) const {
  if (static_cast<int>(values.size()) != arity_) throw std::invalid_argument("weight argument count mismatch");
  std::size_t idx = 0;
  for (int v : values) {
    if (v < 0 || v >= q_) throw std::invalid_argument("weight argument out of range");
    idx = idx * static_cast<std::size_t>(q_) + static_cast<std::size_t>(v);
  }
  return idx;
}

std::vector<Diagnostic> validate(const ModelSpec& s) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };
  if (s.alphabet.size() < 1) add("alphabet", "alphabet is empty");
  if (s.max_degree < 1) add("max-degree", "maximum degree must be at least 1");
  if (s.variables.empty()) add("variables", "model has no variables");
  std::map<int, long> type_balance;
  long var_total = 0, factor_total = 0;
  for (std::size_t x = 0; x < s.variables.size(); ++x) {
    const auto& t = s.variables[x];
    if (t.empty()) add("degree", "variable " + std::to_string(x) + " has degree 0");
    if (static_cast<int>(t.size()) > s.max_degree)
      add("degree", "variable " + std::to_string(x) + " has degree " + std::to_string(t.size()) + " > max degree " +
                        std::to_string(s.max_degree));
    for (int th : t) type_balance[th]++;
    var_total += static_cast<long>(t.size());
  }
  for (std::size_t a = 0; a < s.factors.size(); ++a) {
    const FactorRow& f = s.factors[a];
    const std::string name = "factor " + std::to_string(a);
    if (f.clone_types.empty()) add("degree", name + " has degree 0");
    if (static_cast<int>(f.clone_types.size()) > s.max_degree)
      add("degree", name + " has degree " + std::to_string(f.clone_types.size()) + " > max degree " + std::to_string(s.max_degree));
    for (int th : f.clone_types) type_balance[th]--;
    factor_total += static_cast<long>(f.clone_types.size());
    if (f.weight < 0 || f.weight >= static_cast<int>(s.weights.size()) || !s.weights[static_cast<std::size_t>(f.weight)]) {
      add("weight", name + " references a missing weight function");
      continue;
    }
    const WeightFunction& w = *s.weights[static_cast<std::size_t>(f.weight)];
    if (w.arity() != static_cast<int>(f.clone_types.size()))
      add("arity", name + " has degree " + std::to_string(f.clone_types.size()) + " but weight '" + w.id() + "' has arity " +
                       std::to_string(w.arity()));
    if (w.q() != s.alphabet.size()) add("alphabet", "weight '" + w.id() + "' is defined on a different alphabet size");
  }
  if (var_total != factor_total)
    add("degree-sum", "variable degrees sum to " + std::to_string(var_total) + " but constraint degrees sum to " +
                          std::to_string(factor_total));
  for (auto [th, bal] : type_balance)
    if (bal != 0)
      add("type-balance", "clone type " + std::to_string(th) + ": variable clones minus constraint clones = " + std::to_string(bal));
  return out;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  int c = 0;
  for (std::size_t x = 0; x < spec_.variables.size(); ++x) {
    var_offset_.push_back(c);
    for (std::size_t i = 0; i < spec_.variables[x].size(); ++i, ++c) var_owner_.emplace_back(static_cast<int>(x), static_cast<int>(i));
  }
  c = 0;
  for (std::size_t a = 0; a < spec_.factors.size(); ++a) {
    factor_offset_.push_back(c);
    for (std::size_t j = 0; j < spec_.factors[a].clone_types.size(); ++j, ++c)
      factor_owner_.emplace_back(static_cast<int>(a), static_cast<int>(j));
  }
}

std::shared_ptr<const Model> Model::create(ModelSpec spec) {
  auto diags = validate(spec);
  if (!diags.empty()) {
    std::string msg = "invalid model:";
    for (const auto& d : diags) msg += " [" + d.code + "] " + d.message + ";";
    throw std::invalid_argument(msg);
  }
  return std::shared_ptr<const Model>(new Model(std::move(spec)));
}

int Model::var_clone_type(int c) const {
  auto [x, i] = var_owner_[static_cast<std::size_t>(c)];
  return spec_.variables[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)];
}

int Model::factor_clone_type(int c) const {
  auto [a, j] = factor_owner_[static_cast<std::size_t>(c)];
  return spec_.factors[static_cast<std::size_t>(a)].clone_types[static_cast<std::size_t>(j)];
}

bool same_structure(const Model& a, const Model& b) {
  if (&a == &b) return true;
  const ModelSpec &x = a.spec(), &y = b.spec();
  if (!(x.alphabet == y.alphabet) || x.variables != y.variables || x.factors.size() != y.factors.size()) return false;
  for (std::size_t f = 0; f < x.factors.size(); ++f) {
    if (x.factors[f].clone_types != y.factors[f].clone_types) return false;
    if (a.weight_of(static_cast<int>(f)).id() != b.weight_of(static_cast<int>(f)).id()) return false;
  }
  return true;
}

std::string format_param(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

WeightPtr ising_weight(double beta) {
  std::vector<double> t(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) t[static_cast<std::size_t>(a * 2 + b)] = std::exp(beta * spin_of(a) * spin_of(b));
  return std::make_shared<WeightFunction>("ising(beta=" + format_param(beta) + ")", 2, 2, std::move(t));
}

WeightPtr potts_weight(int k, double beta) {
  if (k < 2) throw std::invalid_argument("potts needs k >= 2");
  std::vector<double> t(static_cast<std::size_t>(k * k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) t[static_cast<std::size_t>(a * k + b)] = std::exp(-beta * (a == b ? 1.0 : 0.0));
  return std::make_shared<WeightFunction>("potts(k=" + std::to_string(k) + ",beta=" + format_param(beta) + ")", k, 2, std::move(t));
}

WeightPtr ksat_weight(const std::vector<int>& signs, double beta) {
  const int k = static_cast<int>(signs.size());
  std::string pat;
  for (int s : signs) {
    if (s != 1 && s != -1) throw std::invalid_argument("literal signs must be +1 or -1");
    pat += s > 0 ? '+' : '-';
  }
  std::vector<double> t(checked_pow(2, k));
  for_each_assignment(2, k, [&](std::size_t idx, const std::vector<int>& v) {
    bool violated = true;
    for (int j = 0; j < k; ++j)
      if (spin_of(v[static_cast<std::size_t>(j)]) != -signs[static_cast<std::size_t>(j)]) violated = false;
    t[idx] = std::exp(-beta * (violated ? 1.0 : 0.0));
  });
  return std::make_shared<WeightFunction>("ksat(k=" + std::to_string(k) + ",beta=" + format_param(beta) + ",signs=" + pat + ")", 2, k,
                                          std::move(t));
}

namespace {

ModelPtr pairwise_regular(const std::string& family, Alphabet alphabet, int n, int d, WeightPtr w) {
  if (n < 1 || d < 1) throw std::invalid_argument(family + ": need n >= 1 and d >= 1");
  if ((static_cast<long>(n) * d) % 2 != 0)
    throw std::invalid_argument(family + ": d*n must be even (d*n = 0 mod 2); got d=" + std::to_string(d) + ", n=" + std::to_string(n));
  ModelSpec s;
  s.family = family;
  s.alphabet = std::move(alphabet);
  s.max_degree = std::max(kDefaultMaxDegree, d);
  s.variables.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(d), 0));
  s.weights.push_back(std::move(w));
  s.factors.assign(static_cast<std::size_t>(n * d / 2), FactorRow{0, {0, 0}});
  return Model::create(std::move(s));
}

}  // namespace

ModelPtr ising(int n, int d, double beta) {
  return pairwise_regular("ising(d=" + std::to_string(d) + ",beta=" + format_param(beta) + ")", Alphabet::spins(), n, d,
                          ising_weight(beta));
}

ModelPtr potts(int n, int d, int k, double beta) {
  return pairwise_regular("potts(d=" + std::to_string(d) + ",k=" + std::to_string(k) + ",beta=" + format_param(beta) + ")",
                          Alphabet::integers(k), n, d, potts_weight(k, beta));
}

ModelPtr ksat(int n, int k, double beta, const std::vector<std::pair<int, int>>& degrees, std::uint64_t sign_seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("ksat: need n >= 1 and k >= 1");
  if (static_cast<int>(degrees.size()) != n) throw std::invalid_argument("ksat: need one degree pair per variable");
  ModelSpec s;
  s.family = "ksat(k=" + std::to_string(k) + ",beta=" + format_param(beta) + ")";
  s.alphabet = Alphabet::spins();
  long pos = 0, total = 0;
  int maxdeg = k;
  for (auto [dp, dm] : degrees) {
    if (dp < 0 || dm < 0 || dp + dm < 1) throw std::invalid_argument("ksat: every variable needs at least one occurrence");
    std::vector<int> t(static_cast<std::size_t>(dp), 1);
    t.insert(t.end(), static_cast<std::size_t>(dm), -1);
    s.variables.push_back(std::move(t));
    pos += dp;
    total += dp + dm;
    maxdeg = std::max(maxdeg, dp + dm);
  }
  s.max_degree = std::max(kDefaultMaxDegree, maxdeg);
  if (total % k != 0)
    throw std::invalid_argument("ksat: total occurrences must be divisible by k (sum of degrees = 0 mod " + std::to_string(k) +
                                "); got " + std::to_string(total));
  const long m = total / k;
  std::vector<int> slots(static_cast<std::size_t>(total), -1);
  std::fill(slots.begin(), slots.begin() + pos, 1);
  Rng rng(sign_seed, "ksat/signs");
  rng.shuffle(slots);
  std::map<std::vector<int>, int> weight_ids;
  for (long a = 0; a < m; ++a) {
    std::vector<int> sg(slots.begin() + a * k, slots.begin() + (a + 1) * k);
    auto it = weight_ids.find(sg);
    if (it == weight_ids.end()) {
      it = weight_ids.emplace(sg, static_cast<int>(s.weights.size())).first;
      s.weights.push_back(ksat_weight(sg, beta));
    }
    s.factors.push_back(FactorRow{it->second, sg});
  }
  return Model::create(std::move(s));
}

ModelPtr ksat_regular(int n, int k, double beta, int positive, int negative, std::uint64_t sign_seed) {
  return ksat(n, k, beta, std::vector<std::pair<int, int>>(static_cast<std::size_t>(n), {positive, negative}), sign_seed);
}

}  // namespace bethelab
