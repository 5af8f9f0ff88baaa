#include "bethelab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "bethelab/bethe.hpp"
#include "bethelab/families.hpp"
#include "bethelab/fixtures.hpp"
#include "bethelab/partition.hpp"
#include "bethelab/planted.hpp"
#include "bethelab/rng.hpp"
#include "bethelab/version.hpp"

namespace bethelab {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  std::string command, experiment;
  json spec;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultAssignmentCap;
};

void check_keys(const json& spec, const std::set<std::string>& allowed, const std::string& where) {
  if (!spec.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& [k, v] : spec.items())
    if (!allowed.count(k)) throw std::invalid_argument(where + ": unknown key '" + k + "'");
}

FamilySpec family_of(const json& spec) {
  if (!spec.contains("family")) throw std::invalid_argument("spec: missing 'family'");
  const json& f = spec.at("family");
  check_keys(f, {"name", "d", "k", "positive", "negative"}, "family");
  return parse_family(f.at("name").get<std::string>(), f.value("d", 3), f.value("k", 3), 0.0, f.value("positive", 1),
                      f.value("negative", 1));
}

std::string describe(const FamilySpec& f) {
  if (f.name == "ising") return "ising(d=" + std::to_string(f.d) + ")";
  if (f.name == "potts") return "potts(d=" + std::to_string(f.d) + ",k=" + std::to_string(f.k) + ")";
  return "ksat(k=" + std::to_string(f.k) + ",pos=" + std::to_string(f.positive) + ",neg=" + std::to_string(f.negative) + ")";
}

template <class T>
std::vector<T> list_of(const json& spec, const char* key) {
  if (!spec.contains(key)) throw std::invalid_argument(std::string("spec: missing '") + key + "'");
  auto v = spec.at(key).get<std::vector<T>>();
  if (v.empty()) throw std::invalid_argument(std::string("spec: '") + key + "' is empty");
  return v;
}

std::uint64_t row_seed(const Context& c, int n, double beta, int ell) {
  return derive_seed(c.seed, c.command + "|n=" + std::to_string(n) + "|beta=" + format_param(beta) + "|ell=" + std::to_string(ell), 0);
}

using Task = std::function<std::vector<ResultRow>()>;

std::vector<ResultRow> run_tasks(const std::vector<Task>& tasks, int jobs) {
  std::vector<std::vector<ResultRow>> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) out[i] = tasks[i]();
  };
  const int nt = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<ResultRow> rows;
  for (auto& r : out) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

struct RowMaker {
  const Context& c;
  std::string family;
  int n;
  double beta;
  int ell;
  std::uint64_t seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  ResultRow operator()(const std::string& quantity, double value, double band = 0, std::uint64_t samples = 0,
                       std::string note = {}) const {
    ResultRow r;
    r.experiment = c.experiment;
    r.command = c.command;
    r.family = family;
    r.n = n;
    r.beta = beta;
    r.ell = ell;
    r.quantity = quantity;
    r.value = value;
    r.band = band;
    r.samples = samples;
    r.seed = seed;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.note = std::move(note);
    return r;
  }
};

// Rows of a task that hit a budget or numerical refusal become one error row.
std::vector<ResultRow> guarded(const RowMaker& mk, const std::function<std::vector<ResultRow>()>& body) {
  try {
    return body();
  } catch (const BudgetExceeded& e) {
    return {mk("error", kNaN, 0, 0, std::string("budget: ") + e.what())};
  } catch (const NotConverged& e) {
    return {mk("error", kNaN, 0, 0, std::string("not converged: ") + e.what())};
  }
}

struct BetheSide {
  double bethe = 0;
  UniquenessVerdict verdict = UniquenessVerdict::Unknown;
  double worst_tv = 0;
  std::string verdict_note;
};

BetheSide bethe_side(const FamilySpec& f, int ell, int m, double eps, int boundary_cap, bool uniqueness) {
  BranchingLaw law = make_law(f);
  LocalDistribution theta = limit_tree(law, ell);
  MarginalAssignment p = build_marginal_assignment(limit_tree(law, ell + m), ell, m);
  BetheSide s;
  s.bethe = bethe_free_energy(theta, p);
  if (!uniqueness) return s;
  s.verdict = UniquenessVerdict::Unique;
  for (const auto& [k, e] : theta.entries) {
    if (e.representative.root_is_factor()) continue;
    UniquenessOptions uo;
    uo.cap = boundary_cap;
    UniquenessResult r;
    try {
      r = gibbs_uniqueness_check(e.representative, p, eps, ell, uo);
    } catch (const BudgetExceeded&) {
      uo.mode = UniquenessMode::Sampled;
      r = gibbs_uniqueness_check(e.representative, p, eps, ell, uo);
    }
    s.worst_tv = std::max(s.worst_tv, r.worst_tv);
    if (r.verdict == UniquenessVerdict::NotUnique) s.verdict = UniquenessVerdict::NotUnique;
    else if (r.verdict == UniquenessVerdict::Unknown && s.verdict == UniquenessVerdict::Unique) s.verdict = UniquenessVerdict::Unknown;
  }
  return s;
}

double verdict_value(UniquenessVerdict v) {
  return v == UniquenessVerdict::Unique ? 1.0 : v == UniquenessVerdict::NotUnique ? 0.0 : -1.0;
}

ModelPtr model_for(const FamilySpec& f, int n, std::uint64_t seed) {
  if (!admissible_size(f, n)) throw std::invalid_argument("size n=" + std::to_string(n) + " violates the family's divisibility constraint");
  return make_model(f, n, seed);
}

std::vector<Task> verify_bethe(const Context& c, int jobs_unused) {
  (void)jobs_unused;
  const json& s = c.spec;
  check_keys(s, {"experiment", "command", "family", "sizes", "betas", "ell", "extension", "samples", "seed", "eps", "boundary_cap", "budget_cap"}, "verify_bethe spec");
  FamilySpec base = family_of(s);
  auto sizes = list_of<int>(s, "sizes");
  auto betas = list_of<double>(s, "betas");
  const int ell = s.value("ell", 2), m = s.value("extension", 1), samples = s.value("samples", 100);
  const double eps = s.value("eps", 0.1);
  const int bcap = s.value("boundary_cap", kDefaultBoundaryCap);
  std::vector<Task> tasks;
  for (double beta : betas)
    for (int n : sizes)
      tasks.push_back([=, &c] {
        FamilySpec f = base;
        f.beta = beta;
        const std::uint64_t seed = row_seed(c, n, beta, ell);
        RowMaker mk{c, describe(f), n, beta, ell, seed};
        return guarded(mk, [&]() -> std::vector<ResultRow> {
          BetheSide b = bethe_side(f, ell, m, eps, bcap, true);
          std::vector<double> v;
          EnumerationOptions eo;
          eo.cap = c.cap;
          for (int i = 0; i < samples; ++i) {
            const std::uint64_t si = derive_seed(seed, "graph", static_cast<std::uint64_t>(i));
            FactorGraph g = sample_graph(model_for(f, n, si), si);
            v.push_back(partition_function_exact(g, eo).log_z / n);
          }
          double mean = 0, var = 0;
          for (double x : v) mean += x;
          mean /= static_cast<double>(v.size());
          for (double x : v) var += (x - mean) * (x - mean);
          const double se = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
          const auto ns = static_cast<std::uint64_t>(samples);
          return {mk("mean_log_z_per_n", mean, se, ns), mk("bethe", b.bethe), mk("gap", mean - b.bethe, se, ns),
                  mk("unique", verdict_value(b.verdict), 0, 0, to_string(b.verdict)),
                  mk("uniqueness_worst_tv", b.worst_tv, 0, 0, "eps=" + format_param(eps))};
        });
      });
  return tasks;
}

std::vector<Task> uniqueness_scan(const Context& c) {
  const json& s = c.spec;
  check_keys(s, {"experiment", "command", "family", "betas", "ell", "extension", "eps", "boundary_cap", "mode", "boundary_samples", "seed", "budget_cap"}, "uniqueness_scan spec");
  FamilySpec base = family_of(s);
  auto betas = list_of<double>(s, "betas");
  const int ell = s.value("ell", 2), m = s.value("extension", 1);
  const double eps = s.value("eps", 0.1);
  const int bcap = s.value("boundary_cap", kDefaultBoundaryCap);
  const std::string mode = s.value("mode", std::string("exhaustive"));
  if (mode != "exhaustive" && mode != "sampled") throw std::invalid_argument("uniqueness_scan: mode must be exhaustive or sampled");
  const std::uint64_t bs = s.value("boundary_samples", std::uint64_t{1000});
  std::vector<Task> tasks;
  for (double beta : betas)
    tasks.push_back([=, &c] {
      FamilySpec f = base;
      f.beta = beta;
      const std::uint64_t seed = row_seed(c, 0, beta, ell);
      RowMaker mk{c, describe(f), 0, beta, ell, seed};
      return guarded(mk, [&]() -> std::vector<ResultRow> {
        BranchingLaw law = make_law(f);
        LocalDistribution theta = limit_tree(law, ell);
        MarginalAssignment p = build_marginal_assignment(limit_tree(law, ell + m), ell, m);
        UniquenessOptions uo;
        uo.cap = bcap;
        uo.mode = mode == "exhaustive" ? UniquenessMode::Exhaustive : UniquenessMode::Sampled;
        uo.samples = bs;
        uo.seed = seed;
        UniquenessVerdict verdict = UniquenessVerdict::Unique;
        double worst = 0;
        std::uint64_t checked = 0;
        for (const auto& [k, e] : theta.entries) {
          if (e.representative.root_is_factor()) continue;
          UniquenessResult r = gibbs_uniqueness_check(e.representative, p, eps, ell, uo);
          worst = std::max(worst, r.worst_tv);
          checked += r.boundaries_checked;
          if (r.verdict == UniquenessVerdict::NotUnique) verdict = r.verdict;
          else if (r.verdict == UniquenessVerdict::Unknown && verdict == UniquenessVerdict::Unique) verdict = r.verdict;
        }
        return {mk("unique", verdict_value(verdict), 0, checked, to_string(verdict)),
                mk("worst_tv", worst, 0, checked, "eps=" + format_param(eps) + ";mode=" + mode)};
      });
    });
  return tasks;
}

std::vector<Task> nonrecon_scan(const Context& c) {
  const json& s = c.spec;
  check_keys(s, {"experiment", "command", "family", "sizes", "betas", "ells", "extension", "samples", "graphs", "seed", "budget_cap"}, "nonrecon_scan spec");
  FamilySpec base = family_of(s);
  auto sizes = list_of<int>(s, "sizes");
  auto betas = list_of<double>(s, "betas");
  auto ells = list_of<int>(s, "ells");
  const int m = s.value("extension", 1), graphs = s.value("graphs", 1);
  const std::uint64_t samples = s.value("samples", std::uint64_t{0});
  std::vector<Task> tasks;
  for (double beta : betas)
    for (int n : sizes)
      for (int ell : ells)
        tasks.push_back([=, &c] {
          FamilySpec f = base;
          f.beta = beta;
          const std::uint64_t seed = row_seed(c, n, beta, ell);
          RowMaker mk{c, describe(f), n, beta, ell, seed};
          return guarded(mk, [&]() -> std::vector<ResultRow> {
            BranchingLaw law = make_law(f);
            MarginalAssignment p = build_marginal_assignment(limit_tree(law, ell + m), ell, m);
            double acc = 0;
            for (int i = 0; i < graphs; ++i) {
              const std::uint64_t si = derive_seed(seed, "graph", static_cast<std::uint64_t>(i));
              FactorGraph g = sample_graph(model_for(f, n, si), si);
              acc += nonreconstruction_estimate(g, p, ell, samples, si, c.cap);
            }
            return {mk("nonreconstruction", acc / graphs, 0, samples, samples ? "sampled" : "exact")};
          });
        });
  return tasks;
}

std::vector<Task> planted_compare(const Context& c) {
  const json& s = c.spec;
  check_keys(s, {"experiment", "command", "family", "sizes", "betas", "ell", "samples", "batch", "floor", "seed", "budget_cap"}, "planted_compare spec");
  FamilySpec base = family_of(s);
  auto sizes = list_of<int>(s, "sizes");
  auto betas = list_of<double>(s, "betas");
  const int ell = s.value("ell", 0);
  const std::uint64_t samples = s.value("samples", std::uint64_t{1000}), batch = s.value("batch", std::uint64_t{64});
  const double floor = s.value("floor", 1e-3);
  std::vector<Task> tasks;
  for (double beta : betas)
    for (int n : sizes)
      tasks.push_back([=, &c] {
        FamilySpec f = base;
        f.beta = beta;
        const std::uint64_t seed = row_seed(c, n, beta, ell);
        RowMaker mk{c, describe(f), n, beta, ell, seed};
        return guarded(mk, [&]() -> std::vector<ResultRow> {
          ModelPtr model = model_for(f, n, seed);
          PlantedOptions po;
          po.ell = ell;
          po.batch = batch;
          po.floor = floor;
          po.cap = c.cap;
          PlantedSampler ps(model, seed, po);
          EnumerationOptions eo;
          eo.cap = c.cap;
          // per side: mean ln Z / n, mean fraction of cyclic depth-ell neighbourhoods, mean girth indicator
          auto stats = [&](const FactorGraph& g, double* acc) {
            acc[0] += partition_function_exact(g, eo).log_z / n;
            LocalIndex idx = local_index(g, ell);
            double cyc = 0;
            for (const auto& [k, cnt] : idx.var_count)
              if (!idx.var_tree.at(k)) cyc += cnt;
            acc[1] += cyc / n;
            acc[2] += is_l_acyclic(g, 2 * ell + 1) ? 1.0 : 0.0;
          };
          double pl[3] = {0, 0, 0}, un[3] = {0, 0, 0};
          for (std::uint64_t i = 0; i < samples; ++i) {
            stats(ps.draw(), pl);
            stats(sample_graph(model, derive_seed(seed, "uniform", i)), un);
          }
          const double k = static_cast<double>(samples);
          const auto& d = ps.diagnostics();
          return {mk("planted_mean_log_z_per_n", pl[0] / k, 0, samples), mk("uniform_mean_log_z_per_n", un[0] / k, 0, samples),
                  mk("planted_cyclic_fraction", pl[1] / k, 0, samples), mk("uniform_cyclic_fraction", un[1] / k, 0, samples),
                  mk("planted_acyclic_rate", pl[2] / k, 0, samples), mk("uniform_acyclic_rate", un[2] / k, 0, samples),
                  mk("acceptance_rate", d.acceptance_rate(), 0, d.in_class),
                  mk("class_hit_rate", d.class_hit_rate(), 0, d.proposals),
                  mk("envelope_violations", static_cast<double>(d.envelope_violations), 0, samples),
                  mk("forced_classes", static_cast<double>(d.forced_classes), 0, samples)};
        });
      });
  return tasks;
}

std::vector<Task> concentration(const Context& c) {
  const json& s = c.spec;
  check_keys(s, {"experiment", "command", "family", "sizes", "betas", "samples", "seed", "budget_cap"}, "concentration spec");
  FamilySpec base = family_of(s);
  auto sizes = list_of<int>(s, "sizes");
  auto betas = list_of<double>(s, "betas");
  const int samples = s.value("samples", 100);
  std::vector<Task> tasks;
  for (double beta : betas)
    for (int n : sizes)
      tasks.push_back([=, &c] {
        FamilySpec f = base;
        f.beta = beta;
        const std::uint64_t seed = row_seed(c, n, beta, 0);
        RowMaker mk{c, describe(f), n, beta, 0, seed};
        return guarded(mk, [&]() -> std::vector<ResultRow> {
          ConcentrationProbe p = concentration_probe(model_for(f, n, seed), samples, seed, c.cap);
          const auto ns = static_cast<std::uint64_t>(samples);
          return {mk("mean_log_z", p.mean_log_z, 0, ns), mk("var_log_z", p.var_log_z, 0, ns),
                  mk("var_over_n", p.var_over_n, 0, ns), mk("var_over_n2", p.var_over_n2, 0, ns)};
        });
      });
  return tasks;
}

DenseMeasure decompose_input(const Context& c, std::string& label, int& n_out) {
  const json& s = c.spec;
  if (s.contains("measure_file")) {
    label = "file";
    DenseMeasure mu = measure_from_json(read_json_file(s.at("measure_file").get<std::string>()));
    n_out = mu.n();
    return mu;
  }
  if (s.contains("preset")) {
    const std::string p = s.at("preset").get<std::string>();
    const int n = s.value("n", 12);
    n_out = n;
    label = p;
    if (p == "product") return fixtures::product(Alphabet::binary(), n, {0.5, 0.5});
    if (p == "point_mass") return fixtures::point_mass(Alphabet::binary(), std::vector<int>(static_cast<std::size_t>(n), 0));
    if (p == "mixture") return fixtures::mixture(n);
    if (p == "block") return fixtures::block(Alphabet::binary(), n, {0.5, 0.5});
    if (p == "half_biased") return fixtures::half_biased(n);
    throw std::invalid_argument("decompose: unknown preset '" + p + "'");
  }
  if (s.contains("family")) {
    FamilySpec f = family_of(s);
    f.beta = s.value("beta", 0.0);
    const int n = s.value("n", 10);
    n_out = n;
    label = describe(f);
    FactorGraph g = sample_graph(model_for(f, n, c.seed), c.seed);
    EnumerationOptions eo;
    eo.cap = c.cap;
    return gibbs(g, eo);
  }
  throw std::invalid_argument("decompose: spec needs 'preset', 'measure_file' or 'family'");
}

ExperimentResult decompose_cmd(const Context& c) {
  check_keys(c.spec, {"experiment", "command", "preset", "measure_file", "family", "beta", "n", "eps", "exact_cap", "seed", "budget_cap"}, "decompose spec");
  const double eps = c.spec.value("eps", 0.3);
  RegularityOptions ro;
  ro.exact_cap = c.spec.value("exact_cap", kExactRegularityCap);
  std::string label;
  int n = 0;
  DenseMeasure mu = decompose_input(c, label, n);
  const double beta = c.spec.value("beta", 0.0);
  RowMaker mk{c, label, n, beta, 0, c.seed};
  Decomposition d = decompose(mu, trivial_partition(mu.n()), eps, ro);
  ExperimentResult r;
  r.report = to_json(d);
  r.report["input"] = label;
  r.report["experiment"] = c.experiment;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& sp : d.splits) min_margin = std::min(min_margin, (sp.index_before - sp.index_after) - sp.bound);
  r.rows = {mk("iterations", d.iterations), mk("partition_classes", static_cast<double>(d.V.size())),
            mk("states", static_cast<double>(d.states.size())), mk("good_states", static_cast<double>(d.I.size())),
            mk("excluded_mass", d.report.excluded_mass), mk("homogeneous", d.report.ok() ? 1.0 : 0.0),
            mk("index", index(mu, d.V)),
            mk("min_split_margin", d.splits.empty() ? kNaN : min_margin, 0, 0, "index drop minus guaranteed bound")};
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> c{"verify_bethe", "decompose", "uniqueness_scan", "nonrecon_scan", "planted_compare", "concentration"};
  return c;
}

ExperimentResult run_experiment(const std::string& command, const json& spec, const RunOptions& opt) {
  Context c;
  c.command = command;
  c.spec = spec;
  if (!spec.is_object()) throw std::invalid_argument("spec: expected a JSON object");
  if (spec.contains("command") && spec.at("command").get<std::string>() != command)
    throw std::invalid_argument("spec is for command '" + spec.at("command").get<std::string>() + "', not '" + command + "'");
  if (!spec.contains("experiment")) throw std::invalid_argument("spec: missing 'experiment'");
  c.experiment = spec.at("experiment").get<std::string>();
  if (opt.seed)
    c.seed = *opt.seed;
  else if (spec.contains("seed"))
    c.seed = spec.at("seed").get<std::uint64_t>();
  else
    throw std::invalid_argument("spec: a seed is mandatory ('seed' or --seed)");
  c.cap = opt.budget_cap ? *opt.budget_cap : spec.value("budget_cap", kDefaultAssignmentCap);

  if (command == "decompose") {
    ExperimentResult r = decompose_cmd(c);
    r.experiment = c.experiment;
    return r;
  }
  std::vector<Task> tasks;
  if (command == "verify_bethe") tasks = verify_bethe(c, opt.jobs);
  else if (command == "uniqueness_scan") tasks = uniqueness_scan(c);
  else if (command == "nonrecon_scan") tasks = nonrecon_scan(c);
  else if (command == "planted_compare") tasks = planted_compare(c);
  else if (command == "concentration") tasks = concentration(c);
  else throw std::invalid_argument("unknown command '" + command + "'");
  ExperimentResult r;
  r.experiment = c.experiment;
  r.rows = run_tasks(tasks, opt.jobs);
  return r;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) {
    if (ch == '"') o += '"';
    o += ch;
  }
  return o + "\"";
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string csv_header() {
  return "schema_version,experiment,command,family,n,beta,ell,quantity,value,band,samples,seed,code_version,wall_ms,note";
}

std::string csv_line(const ResultRow& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
  return std::to_string(kCsvSchemaVersion) + "," + csv_field(r.experiment) + "," + csv_field(r.command) + "," +
         csv_field(r.family) + "," + std::to_string(r.n) + "," + num(r.beta) + "," + std::to_string(r.ell) + "," +
         csv_field(r.quantity) + "," + num(r.value) + "," + num(r.band) + "," + std::to_string(r.samples) + "," +
         std::to_string(r.seed) + "," + kCodeVersion + "," + wall + "," + csv_field(r.note);
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << csv_header() << "\n";
  for (const auto& r : rows) out << csv_line(r) << "\n";
}

}  // namespace bethelab
