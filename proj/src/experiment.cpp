#include "lmdp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "lmdp/rng.hpp"

namespace lmdp {

namespace fs = std::filesystem;

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::RandomErgodic: return "random-ergodic";
    case InstanceKind::RingWithJumps: return "ring-with-jumps";
    case InstanceKind::Gridworld: return "gridworld";
  }
  return "unknown";
}

InstanceKind instance_kind_from_string(const std::string& name) {
  for (auto kind : {InstanceKind::RandomErgodic, InstanceKind::RingWithJumps, InstanceKind::Gridworld})
    if (to_string(kind) == name) return kind;
  throw InvalidInput("unknown instance kind '" + name + "'");
}

namespace {

constexpr int kGenerationAttempts = 8;

Matrix random_ergodic(int n, const CounterRng& rng, std::uint64_t attempt, double min_prob) {
  Matrix k(n, n);
  const double free_mass = 1.0 - n * min_prob;
  for (int x = 0; x < n; ++x) {
    Eigen::RowVectorXd u(n);
    for (int y = 0; y < n; ++y)
      // Shift away from zero so every row has positive total weight.
      u(y) = rng.uniform_at((attempt * n + x) * n + y) + 1e-12;
    u /= u.sum();
    k.row(x) = (min_prob + free_mass * u.array()).matrix();
    k.row(x) /= k.row(x).sum();
  }
  return k;
}

Matrix ring_with_jumps(int n, double min_prob) {
  const double eps = std::min(1.0, n * min_prob);
  Matrix k = Matrix::Constant(n, n, eps / n);
  for (int x = 0; x < n; ++x) k(x, (x + 1) % n) += 1.0 - eps;
  return k;
}

Matrix gridworld(int n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (side * side != n || side < 2)
    throw InvalidInput("gridworld needs n to be a perfect square of side >= 2");
  Matrix k = Matrix::Zero(n, n);
  auto index = [side](int r, int c) { return ((r + side) % side) * side + (c + side) % side; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int x = index(r, c);
      k(x, x) += 0.2;
      k(x, index(r - 1, c)) += 0.2;
      k(x, index(r + 1, c)) += 0.2;
      k(x, index(r, c - 1)) += 0.2;
      k(x, index(r, c + 1)) += 0.2;
    }
  }
  return k;
}

}  // namespace

PassiveDynamics generate_instance(InstanceKind kind, int n, std::uint64_t seed, double min_prob) {
  if (n < 2) throw InvalidInput("instance size must be at least 2");
  if (kind == InstanceKind::RandomErgodic && !(min_prob > 0.0 && min_prob <= 1.0 / n))
    throw InvalidInput("min_prob must lie in (0, 1/n] for random-ergodic instances");
  if (kind == InstanceKind::RingWithJumps && !(min_prob >= 0.0 && min_prob <= 1.0 / n))
    throw InvalidInput("min_prob must lie in [0, 1/n] for ring-with-jumps instances");

  const CounterRng rng(seed, CounterRng::kInstance);
  std::string last_error;
  for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    Matrix k;
    switch (kind) {
      case InstanceKind::RandomErgodic: k = random_ergodic(n, rng, attempt, min_prob); break;
      case InstanceKind::RingWithJumps: k = ring_with_jumps(n, min_prob); break;
      case InstanceKind::Gridworld: k = gridworld(n); break;
    }
    try {
      PassiveDynamics p(std::move(k));
      analyze(p);
      return p;
    } catch (const Error& e) {
      last_error = e.what();
    }
    // The structured kinds are deterministic; retrying cannot help.
    if (kind != InstanceKind::RandomErgodic) break;
  }
  throw GenerationFailed(to_string(kind) + " instance failed the mixing checks: " + last_error);
}

PassiveDynamics InstanceSpec::build() const {
  if (matrix) return PassiveDynamics(*matrix);
  return generate_instance(kind, n, seed, min_prob);
}

bool InstanceSpec::operator==(const InstanceSpec& other) const {
  if (matrix.has_value() != other.matrix.has_value()) return false;
  if (matrix) return *matrix == *other.matrix;
  return kind == other.kind && n == other.n && seed == other.seed && min_prob == other.min_prob;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const bool same_mu0 = mu0.has_value() == o.mu0.has_value() && (!mu0 || *mu0 == *o.mu0);
  return instance == o.instance && adversary_kind == o.adversary_kind &&
         adversary_params == o.adversary_params && adversary_seed == o.adversary_seed &&
         replay_path == o.replay_path && horizon == o.horizon && mode == o.mode &&
         seeds == o.seeds && output == o.output && tolerances == o.tolerances && same_mu0 &&
         negative_control == o.negative_control;
}

// ---------------------------------------------------------------- JSON

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int x = 0; x < m.rows(); ++x) {
    json row = json::array();
    for (int y = 0; y < m.cols(); ++y) row.push_back(m(x, y));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidInput(where + ": expected a nonempty array of rows");
  const auto rows = static_cast<int>(j.size());
  if (!j[0].is_array()) throw InvalidInput(where + ": rows must be arrays");
  const auto cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int x = 0; x < rows; ++x) {
    if (!j[x].is_array() || static_cast<int>(j[x].size()) != cols)
      throw InvalidInput(where + ": ragged matrix");
    for (int y = 0; y < cols; ++y) {
      if (!j[x][y].is_number()) throw InvalidInput(where + ": non-numeric entry");
      m(x, y) = j[x][y].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidInput(where + ": expected a nonempty array");
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(where + ": non-numeric entry");
    v(i) = j[i].get<double>();
  }
  return v;
}

namespace {

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw InvalidInput(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(where + ": wrong type");
  }
}

}  // namespace

json to_json(const PassiveDynamics& p) {
  return json{{"n", p.size()}, {"kernel", matrix_to_json(p.kernel())}};
}

PassiveDynamics instance_from_json(const json& j) {
  if (j.is_array()) return PassiveDynamics(matrix_from_json(j, "instance"));
  if (j.contains("kernel")) return PassiveDynamics(matrix_from_json(j.at("kernel"), "instance.kernel"));
  if (j.contains("matrix")) return PassiveDynamics(matrix_from_json(j.at("matrix"), "instance.matrix"));
  InstanceSpec spec;
  spec.kind = instance_kind_from_string(get_as<std::string>(require(j, "kind", "instance"), "instance.kind"));
  spec.n = get_as<int>(require(j, "n", "instance"), "instance.n");
  spec.seed = j.contains("seed") ? get_as<std::uint64_t>(j.at("seed"), "instance.seed") : 0;
  spec.min_prob = j.contains("min_prob") ? get_as<double>(j.at("min_prob"), "instance.min_prob") : 0.0;
  return spec.build();
}

StateCost cost_from_json(const json& j) {
  if (j.is_array()) return StateCost(vector_from_json(j, "cost"));
  return StateCost(vector_from_json(require(j, "values", "cost"), "cost.values"));
}

json to_json(const LmdpSolution& sol) {
  return json{{"lambda", sol.lambda},
              {"z", vector_to_json(sol.z)},
              {"v", vector_to_json(sol.v)},
              {"policy", matrix_to_json(sol.policy.kernel())},
              {"iterations", sol.iterations},
              {"residual", sol.residual}};
}

json to_json(const ChainDiagnostics& d) {
  return json{{"alpha", d.alpha},        {"tau", d.tau},
              {"h_prim", d.h_prim},      {"h_hit", d.h_hit},
              {"stationary", vector_to_json(d.stationary)},
              {"alpha_ub", d.alpha_ub},  {"tau_ub", d.tau_ub},
              {"p_star", d.p_star},      {"B", d.log_barrier}};
}

json to_json(const Ledger& ledger) {
  json out = json::object();
  for (const auto& [name, e] : ledger)
    out[name] = json{{"pass", e.pass},
                     {"max_slack", e.max_slack},
                     {"min_slack", e.min_slack},
                     {"violations", e.violations},
                     {"checked", e.checked}};
  return out;
}

json summary_json(const ExperimentTrace& trace) {
  const auto& s = trace.summary;
  return json{{"idealized_regret", s.idealized_regret},
              {"true_regret_proxy", s.true_regret_proxy},
              {"fullbound_value", s.fullbound_value},
              {"tau_ub", trace.chain.tau_ub},
              {"h_hit", trace.chain.h_hit},
              {"h_prim", trace.chain.h_prim},
              {"alpha", trace.chain.alpha},
              {"B", trace.chain.log_barrier},
              {"ledger", to_json(s.ledger)},
              {"comparator_value", s.comparator_value},
              {"comparator_slack", s.comparator_slack},
              {"max_policy_tau", s.max_policy_tau},
              {"T", trace.horizon},
              {"mode", to_string(trace.mode)},
              {"seed", trace.seed},
              {"pass", s.all_pass()}};
}

// ---------------------------------------------------------------- config

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  ExperimentConfig c;

  const json& inst = require(j, "instance", "config");
  if (inst.is_array()) {
    c.instance.matrix = matrix_from_json(inst, "instance");
  } else if (inst.is_object() && (inst.contains("matrix") || inst.contains("kernel"))) {
    const char* key = inst.contains("matrix") ? "matrix" : "kernel";
    c.instance.matrix = matrix_from_json(inst.at(key), std::string("instance.") + key);
  } else {
    c.instance.kind = instance_kind_from_string(
        get_as<std::string>(require(inst, "kind", "instance"), "instance.kind"));
    c.instance.n = get_as<int>(require(inst, "n", "instance"), "instance.n");
    c.instance.seed = inst.contains("seed") ? get_as<std::uint64_t>(inst.at("seed"), "instance.seed") : 0;
    c.instance.min_prob = get_as<double>(require(inst, "min_prob", "instance"), "instance.min_prob");
    if (c.instance.n < 2) throw InvalidInput("instance.n must be at least 2");
    if (!(c.instance.min_prob > 0.0 && c.instance.min_prob <= 1.0 / c.instance.n))
      throw InvalidInput("instance.min_prob must lie in (0, 1/n]");
  }
  if (c.instance.matrix && c.instance.matrix->rows() < 2)
    throw InvalidInput("instance matrix must have at least 2 states");

  const json& adv = require(j, "adversary", "config");
  c.adversary_kind = adversary_kind_from_string(
      get_as<std::string>(require(adv, "kind", "adversary"), "adversary.kind"));
  if (adv.contains("params")) {
    if (!adv.at("params").is_object()) throw InvalidInput("adversary.params: expected an object");
    for (const auto& [key, value] : adv.at("params").items())
      c.adversary_params[key] = get_as<double>(value, "adversary.params." + key);
  }
  if (adv.contains("seed")) c.adversary_seed = get_as<std::uint64_t>(adv.at("seed"), "adversary.seed");
  if (adv.contains("path")) c.replay_path = get_as<std::string>(adv.at("path"), "adversary.path");
  if (c.adversary_kind == AdversaryKind::ReplayFile && c.replay_path.empty())
    throw InvalidInput("adversary.path is required for replay-file");

  c.horizon = get_as<int>(require(j, "T", "config"), "T");
  if (c.horizon < 1) throw InvalidInput("T must be at least 1");
  c.mode = mode_from_string(get_as<std::string>(require(j, "mode", "config"), "mode"));

  const json& seeds = require(j, "seeds", "config");
  if (!seeds.is_array() || seeds.empty()) throw InvalidInput("seeds: expected a nonempty array");
  c.seeds.clear();
  for (const auto& s : seeds) c.seeds.push_back(get_as<std::uint64_t>(s, "seeds[]"));

  c.output = get_as<std::string>(require(j, "output", "config"), "output");

  if (j.contains("tolerances")) {
    const json& tol = j.at("tolerances");
    if (tol.contains("solver_tol")) c.tolerances.solver_tol = get_as<double>(tol.at("solver_tol"), "tolerances.solver_tol");
    if (tol.contains("oracle_tol")) c.tolerances.oracle_tol = get_as<double>(tol.at("oracle_tol"), "tolerances.oracle_tol");
    if (!(c.tolerances.solver_tol > 0.0) || !(c.tolerances.oracle_tol > 0.0))
      throw InvalidInput("tolerances must be positive");
  }
  if (j.contains("mu0")) c.mu0 = vector_from_json(j.at("mu0"), "mu0");
  if (j.contains("negative_control"))
    c.negative_control = get_as<bool>(j.at("negative_control"), "negative_control");
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  if (c.instance.matrix) {
    j["instance"] = json{{"matrix", matrix_to_json(*c.instance.matrix)}};
  } else {
    j["instance"] = json{{"kind", to_string(c.instance.kind)},
                         {"n", c.instance.n},
                         {"seed", c.instance.seed},
                         {"min_prob", c.instance.min_prob}};
  }
  json adv{{"kind", to_string(c.adversary_kind)}, {"seed", c.adversary_seed}};
  json params = json::object();
  for (const auto& [k, v] : c.adversary_params) params[k] = v;
  adv["params"] = params;
  if (!c.replay_path.empty()) adv["path"] = c.replay_path;
  j["adversary"] = adv;
  j["T"] = c.horizon;
  j["mode"] = to_string(c.mode);
  j["seeds"] = c.seeds;
  j["output"] = c.output;
  j["tolerances"] = json{{"solver_tol", c.tolerances.solver_tol}, {"oracle_tol", c.tolerances.oracle_tol}};
  if (c.mu0) j["mu0"] = vector_to_json(*c.mu0);
  if (c.negative_control) j["negative_control"] = true;
  return j;
}

std::vector<Vector> load_cost_sequence(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open cost sequence '" + path.string() + "'");
  std::vector<Vector> out;
  if (path.extension() == ".json") {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidInput("cost sequence is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_array()) throw InvalidInput("cost sequence JSON must be an array of arrays");
    for (const auto& row : j) out.push_back(vector_from_json(row, "cost sequence"));
    return out;
  }
  // CSV: one round per line, comma-separated costs; a non-numeric first
  // line is taken as a header.
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw InvalidInput("cost sequence has a non-numeric row: " + line);
    }
    first = false;
    out.push_back(Eigen::Map<Vector>(row.data(), static_cast<int>(row.size())));
  }
  return out;
}

Adversary make_adversary(const ExperimentConfig& config, std::uint64_t sweep_seed, int n) {
  Adversary adv;
  adv.kind = config.adversary_kind;
  adv.params = config.adversary_params;
  adv.seed = CounterRng::mix(config.adversary_seed) ^ sweep_seed;
  if (adv.kind == AdversaryKind::ReplayFile) {
    adv.replay_path = config.replay_path;
    adv.replay = load_cost_sequence(config.replay_path);
    for (const auto& c : adv.replay)
      if (c.size() != n) throw InvalidInput("replayed cost has the wrong number of states");
  }
  return adv;
}

// ---------------------------------------------------------------- CSV

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(std::ostream& os, const ExperimentTrace& trace) {
  bool first = true;
  for (const char* col : kTraceColumns) {
    os << (first ? "" : ",") << col;
    first = false;
  }
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.t << ',' << format_double(r.lambda) << ',' << format_double(r.idealized_loss) << ','
       << format_double(r.expected_true_loss) << ',' << format_double(r.sampled_loss) << ','
       << format_double(r.policy_change) << ',' << format_double(r.change_rate_bound) << ','
       << format_double(r.state_gap) << ',' << format_double(r.pmudiff_bound) << ','
       << format_double(r.cum_idealized_regret) << ',' << format_double(r.cum_true_regret_proxy)
       << ',' << format_double(r.v_span) << '\n';
  }
}

// ---------------------------------------------------------------- run

namespace {

int thread_budget(int requested, std::size_t jobs) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("LMDP_LAB_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(threads, static_cast<int>(jobs)));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

}  // namespace

RunOutcome run_from_config(const ExperimentConfig& config, const RunOverrides& overrides) {
  std::vector<std::uint64_t> seeds = config.seeds;
  if (overrides.seed) seeds = {*overrides.seed};
  const fs::path out_dir = overrides.output.value_or(config.output);
  const bool negative = overrides.negative_control.value_or(config.negative_control);

  const PassiveDynamics p = config.instance.build();
  const int n = p.size();
  Vector mu0 = config.mu0.value_or(Vector::Constant(n, 1.0 / n));
  if (mu0.size() != n) throw InvalidInput("mu0 has the wrong length");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  RunOptions run_opts;
  run_opts.solver_tol = config.tolerances.solver_tol;
  run_opts.corrupt_round = negative ? std::max(1, config.horizon / 2) : 0;
  run_opts.description = config.instance.matrix
                             ? "inline n=" + std::to_string(n)
                             : to_string(config.instance.kind) + " n=" + std::to_string(n);

  struct SeedResult {
    json summary;
    bool pass = false;
    std::string error;
    std::vector<fs::path> files;
  };
  std::vector<SeedResult> results(seeds.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SeedResult& res = results[i];
      try {
        const Adversary adv = make_adversary(config, seeds[i], n);
        const ExperimentTrace trace = run_experiment(p, mu0, adv, config.horizon, config.mode, seeds[i], run_opts);
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        const std::string tag = "seed" + std::to_string(seeds[i]);
        const fs::path csv_path = out_dir / ("trace_" + tag + ".csv");
        const fs::path summary_path = out_dir / ("summary_" + tag + ".json");
        write_text(csv_path, csv.str());
        res.summary = summary_json(trace);
        write_text(summary_path, res.summary.dump(2) + "\n");
        res.pass = trace.summary.all_pass();
        res.files = {csv_path, summary_path};
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  };
  const int threads = thread_budget(overrides.threads, seeds.size());
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& res : results)
    if (!res.error.empty()) throw Error(res.error);

  RunOutcome outcome;
  double ideal_sum = 0.0, ideal_max = -std::numeric_limits<double>::infinity();
  double true_sum = 0.0, true_max = -std::numeric_limits<double>::infinity();
  json failing = json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& res = results[i];
    const double ideal = res.summary["idealized_regret"].get<double>();
    const double proxy = res.summary["true_regret_proxy"].get<double>();
    ideal_sum += ideal;
    ideal_max = std::max(ideal_max, ideal);
    true_sum += proxy;
    true_max = std::max(true_max, proxy);
    if (!res.pass) {
      all_pass = false;
      failing.push_back(seeds[i]);
    }
    outcome.files.insert(outcome.files.end(), res.files.begin(), res.files.end());
  }
  const double count = static_cast<double>(seeds.size());
  outcome.aggregate = json{
      {"seeds", seeds},
      {"idealized_regret", {{"mean", ideal_sum / count}, {"max", ideal_max}}},
      {"true_regret_proxy", {{"mean", true_sum / count}, {"max", true_max}}},
      {"fullbound_value", results.front().summary["fullbound_value"]},
      {"all_pass", all_pass},
      {"failing_seeds", failing}};
  const fs::path agg_path = out_dir / "aggregate.json";
  write_text(agg_path, outcome.aggregate.dump(2) + "\n");
  outcome.files.push_back(agg_path);
  outcome.exit_code = all_pass ? 0 : 1;
  return outcome;
}

// ---------------------------------------------------------------- verify

namespace {

struct CheckList {
  json items = json::array();
  bool pass = true;

  void add(const std::string& name, bool ok, json detail) {
    detail["name"] = name;
    detail["pass"] = ok;
    items.push_back(std::move(detail));
    pass = pass && ok;
  }
};

Vector random_cost(const CounterRng& rng, std::uint64_t index, int n) {
  Vector c(n);
  for (int x = 0; x < n; ++x) c(x) = rng.uniform_at(index * n + x);
  return c;
}

}  // namespace

VerifyReport verify(const PassiveDynamics& p, const std::optional<StateCost>& cost,
                    const VerifyOptions& options) {
  const int n = p.size();
  VerifyReport out;
  json& rep = out.report;
  CheckList checks;

  // Assumptions.
  bool primitive = false;
  try {
    rep["h_prim"] = primitivity_index(p);
    primitive = true;
  } catch (const NotPrimitive& e) {
    rep["h_prim"] = nullptr;
    rep["assumption1_error"] = e.what();
  }
  checks.add("assumption1_irreducible_aperiodic", primitive, json::object());
  const double alpha = ergodicity_coefficient(p.kernel());
  rep["alpha"] = alpha;
  checks.add("assumption2_contraction", alpha < 1.0, json{{"alpha", alpha}});
  rep["B"] = p.log_barrier();
  if (!primitive || !(alpha < 1.0)) {
    rep["checks"] = checks.items;
    rep["pass"] = false;
    out.pass = false;
    return out;
  }

  const ChainDiagnostics d = analyze(p);
  rep["tau"] = d.tau;
  rep["tau_ub"] = d.tau_ub;
  rep["alpha_ub"] = d.alpha_ub;
  rep["h_hit"] = d.h_hit;

  const CounterRng rng(options.seed, CounterRng::kSampling);
  const StateCost c = cost.value_or(StateCost(random_cost(rng, 0, n)));
  SolveOptions sopts;
  sopts.tol = options.tolerances.solver_tol;
  const LmdpSolution sol = solve(p, c, sopts);
  rep["lambda"] = sol.lambda;
  rep["bellman_residual"] = sol.residual;

  FrankWolfeOptions fw;
  fw.tol = options.tolerances.oracle_tol;
  try {
    const FrankWolfeResult fwr = minimize_f(p, c, fw);
    const double diff = std::abs(fwr.value - sol.lambda);
    checks.add("eigen_vs_frank_wolfe", diff <= options.tolerances.oracle_tol,
               json{{"lambda_eigen", sol.lambda}, {"lambda_fw", fwr.value}, {"abs_diff", diff},
                    {"fw_iterations", fwr.iterations}, {"fw_gap", fwr.gap}});
  } catch (const NonConvergence& e) {
    checks.add("eigen_vs_frank_wolfe", false, json{{"error", e.what()}});
  }

  const StationaryTransitionMeasure pi = measure_from_policy(p, sol.policy);
  const double kkt = kkt_residual(pi, c, sol.v, sol.lambda, p);
  checks.add("kkt_residual", kkt <= 1e-8, json{{"residual", kkt}});

  // Value span, control cost and policy contraction on sampled costs.
  double worst_span = 0.0, worst_kl = 0.0, worst_alpha = 0.0;
  std::vector<LmdpSolution> sols;
  std::vector<Vector> costs;
  sols.push_back(sol);
  costs.push_back(c.values());
  for (int s = 1; s <= options.samples; ++s) {
    costs.push_back(random_cost(rng, s, n));
    sols.push_back(solve(p, StateCost(costs.back()), sopts));
  }
  for (const auto& s : sols) {
    worst_span = std::max(worst_span, span(s.v));
    worst_kl = std::max(worst_kl, max_control_cost(p, s.policy));
    worst_alpha = std::max(worst_alpha, ergodicity_coefficient(s.policy.kernel()));
  }
  checks.add("value_span", worst_span <= d.h_hit, json{{"max", worst_span}, {"bound", d.h_hit}});
  checks.add("control_cost", worst_kl <= d.h_hit + 1.0, json{{"max", worst_kl}, {"bound", d.h_hit + 1.0}});
  checks.add("policy_contraction", worst_alpha <= d.alpha_ub + 1e-10,
             json{{"max", worst_alpha}, {"bound", d.alpha_ub}});

  // Cost-to-value Lipschitz bound on all sampled pairs, including (c, c).
  double worst_ratio = 0.0;
  bool lipschitz_ok = true;
  bool policy_ok = true;
  for (std::size_t a = 0; a < sols.size(); ++a) {
    for (std::size_t b = a; b < sols.size(); ++b) {
      const double dv = span(sols[a].v - sols[b].v);
      const double dc = (costs[a] - costs[b]).cwiseAbs().maxCoeff();
      lipschitz_ok = lipschitz_ok && dv <= 2.0 * d.tau_ub * dc + 1e-9;
      if (dc > 0.0) worst_ratio = std::max(worst_ratio, dv / dc);
      const double dq = max_row_l1(sols[a].policy.kernel(), sols[b].policy.kernel());
      policy_ok = policy_ok && dq <= 0.5 * dv + 1e-9;
    }
  }
  checks.add("value_lipschitz", lipschitz_ok,
             json{{"max_ratio", worst_ratio}, {"bound", 2.0 * d.tau_ub},
                  {"self_pair_span", span(sols[0].v - sols[0].v)}});
  checks.add("policy_lipschitz", policy_ok, json::object());

  rep["checks"] = checks.items;
  rep["pass"] = checks.pass;
  out.pass = checks.pass;
  return out;
}

}  // namespace lmdp
