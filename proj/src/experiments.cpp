#include "stolab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "stolab/cones.hpp"
#include "stolab/ensemble.hpp"
#include "stolab/model.hpp"
#include "stolab/operators.hpp"
#include "stolab/solver.hpp"

#ifndef STOLAB_VERSION
#define STOLAB_VERSION "unknown"
#endif

namespace stolab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string library_version() { return STOLAB_VERSION; }

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> rows = {
      {"sto-iterate", "fixed-point iteration of the (noisy) self-consistent operator with Hilbert diagnostics",
       {"map", "coupling", "delta", "cone.a"}},
      {"stability-check", "coupling norms, stability condition and the Dirac/basin delta windows",
       {"map", "coupling", "delta"}},
      {"hilbert-validate", "closed-form Hilbert metric against the bisection oracle on random pairs",
       {"cone.a", "seed"}},
      {"order-check", "Monte Carlo check of order preservation and differential cone inclusion",
       {"map", "coupling", "delta", "cone.a", "cone.alpha", "seed"}},
      {"ensemble", "finite-N chain trajectory with Wasserstein distances to Lebesgue and to 0",
       {"map", "delta", "chain.N", "chain.T_max", "seed"}},
      {"metastable", "absorption times of the noisy chain versus N and the noisy density fixed point",
       {"map", "delta", "noise.gamma", "chain.N_list", "chain.T_max", "chain.replicas", "seed"}},
      {"lln", "one-step empirical measure against the grid operator for growing N",
       {"map", "coupling", "delta", "chain.N_list", "seed"}},
      {"dirac-basin", "particles started near 0 iterated by the deterministic chain",
       {"map", "delta", "epsilon", "n_steps", "chain.N", "seed"}},
  };
  return rows;
}

json experiments_json() {
  json arr = json::array();
  for (const auto& e : list_experiments()) {
    arr.push_back({{"name", e.name}, {"description", e.description}, {"required", e.required}});
  }
  return arr;
}

std::string experiments_table() {
  std::ostringstream os;
  os << std::left << std::setw(18) << "experiment" << std::setw(52) << "required keys"
     << "description\n";
  for (const auto& e : list_experiments()) {
    std::string keys;
    for (const auto& k : e.required) keys += (keys.empty() ? "" : ", ") + k;
    os << std::setw(18) << e.name << std::setw(52) << keys << e.description << '\n';
  }
  return os.str();
}

json error_json(const std::exception& e) {
  json j = {{"status", "error"}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["kind"] = std::string(to_string(err->kind()));
  } else {
    j["kind"] = "internal";
  }
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) j["field"] = ce->field();
  if (const auto* ee = dynamic_cast<const ConeEscapeError*>(&e)) j["cone_report"] = ee->report();
  return j;
}

namespace {

// ---- config access ----------------------------------------------------------------

const json* lookup(const json& cfg, const std::string& dotted) {
  const json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &node->at(key);
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

const json& need(const json& cfg, const std::string& key) {
  const json* v = lookup(cfg, key);
  if (!v || v->is_null()) throw ConfigError(key, "missing required field '" + key + "'");
  return *v;
}

double get_number(const json& cfg, const std::string& key) {
  const json& v = need(cfg, key);
  if (!v.is_number()) throw ConfigError(key, "field '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "field '" + key + "' must be finite");
  return d;
}

double get_number(const json& cfg, const std::string& key, double fallback) {
  return lookup(cfg, key) ? get_number(cfg, key) : fallback;
}

long get_int(const json& cfg, const std::string& key) {
  const double d = get_number(cfg, key);
  if (d != std::floor(d)) throw ConfigError(key, "field '" + key + "' must be an integer");
  return static_cast<long>(d);
}

long get_int(const json& cfg, const std::string& key, long fallback) {
  return lookup(cfg, key) ? get_int(cfg, key) : fallback;
}

long get_positive(const json& cfg, const std::string& key, std::optional<long> fallback = std::nullopt) {
  const long v = fallback && !lookup(cfg, key) ? *fallback : get_int(cfg, key);
  if (v < 1) throw ConfigError(key, "field '" + key + "' must be >= 1");
  return v;
}

std::uint64_t get_seed(const json& cfg) {
  const json& v = need(cfg, "seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError("seed", "field 'seed' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<int> get_int_list(const json& cfg, const std::string& key) {
  const json& v = need(cfg, key);
  if (!v.is_array() || v.empty()) throw ConfigError(key, "field '" + key + "' must be a non-empty list");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      throw ConfigError(key, "entries of '" + key + "' must be positive integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

std::string get_string(const json& cfg, const std::string& key, const std::string& fallback) {
  const json* v = lookup(cfg, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(key, "field '" + key + "' must be a string");
  return v->get<std::string>();
}

MapPtr get_map(const json& cfg) {
  const json& m = need(cfg, "map");
  if (!m.is_object()) throw ConfigError("map", "field 'map' must be an object");
  const std::string name = get_string(cfg, "map.name", "linear-k");
  try {
    return make_map(name, m);
  } catch (const Error& e) {
    throw ConfigError("map", e.what());
  }
}

CouplingPtr get_coupling(const json& cfg) {
  const json& c = need(cfg, "coupling");
  const std::string name = c.is_string() ? c.get<std::string>() : get_string(cfg, "coupling.name", "");
  try {
    return make_coupling(name);
  } catch (const Error& e) {
    throw ConfigError("coupling", e.what());
  }
}

/// The particle chain is the f = kx, sincos example.
double chain_k(const json& cfg) {
  const MapPtr map = get_map(cfg);
  if (map->name() != "linear-k") {
    throw ConfigError("map.name", "particle experiments support only map 'linear-k'");
  }
  if (lookup(cfg, "coupling") && get_coupling(cfg)->name() != "sincos") {
    throw ConfigError("coupling", "particle experiments support only coupling 'sincos'");
  }
  return map->expansion();
}

std::size_t get_grid(const json& cfg, std::size_t fallback) {
  const long g = get_int(cfg, "grid.G", static_cast<long>(fallback));
  try {
    check_grid_size(static_cast<std::size_t>(std::max(0L, g)));
  } catch (const Error& e) {
    throw ConfigError("grid.G", e.what());
  }
  return static_cast<std::size_t>(g);
}

std::optional<NoiseKernel> get_noise(const json& cfg, double k, double delta, std::size_t G,
                                     json& resolved, bool required = false) {
  if (!lookup(cfg, "noise")) {
    if (required) need(cfg, "noise");
    return std::nullopt;
  }
  NoiseParams p;
  const json& d = need(cfg, "noise").contains("Delta") ? need(cfg, "noise.Delta") : json("auto");
  if (d.is_string()) {
    if (d.get<std::string>() != "auto") throw ConfigError("noise.Delta", "noise.Delta must be a number or \"auto\"");
    try {
      p.Delta = delta_max_trap(delta, k, 0.95);
    } catch (const Error& e) {
      throw ConfigError("noise.Delta", std::string("cannot resolve Delta automatically: ") + e.what());
    }
  } else {
    p.Delta = get_number(cfg, "noise.Delta");
  }
  p.gamma = get_number(cfg, "noise.gamma", 0.0);
  try {
    p.bump = bump_profile_from_string(get_string(cfg, "noise.bump", "scaled"));
    p.cutoff = cutoff_profile_from_string(get_string(cfg, "noise.cutoff", "smooth"));
  } catch (const Error& e) {
    throw ConfigError("noise", e.what());
  }
  resolved["Delta"] = p.Delta;
  resolved["gamma"] = p.gamma;
  resolved["bump"] = to_string(p.bump);
  resolved["cutoff"] = to_string(p.cutoff);
  try {
    NoiseKernel kern(p, G);
    resolved["noise_a3_constant"] = kern.a3_constant();
    return kern;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Domain) throw ConfigError("noise", e.what());
    throw;
  }
}

GridDensity get_initial(const json& cfg, std::size_t G, const std::string& fallback_kind,
                        double fallback_amp) {
  const json* init = lookup(cfg, "initial");
  if (init && init->contains("values")) {
    std::vector<double> v = init->at("values").get<std::vector<double>>();
    if (v.size() != G) throw ConfigError("initial.values", "initial.values must have grid.G entries");
    try {
      return GridDensity(std::move(v));
    } catch (const Error& e) {
      throw ConfigError("initial.values", e.what());
    }
  }
  const std::string kind = init ? get_string(cfg, "initial.kind", fallback_kind) : fallback_kind;
  const double amp = init ? get_number(cfg, "initial.amplitude", fallback_amp) : fallback_amp;
  constexpr double tau = 2.0 * 3.14159265358979323846;
  std::function<double(double)> f;
  if (kind == "constant") f = [](double) { return 1.0; };
  else if (kind == "sin") f = [&](double x) { return 1.0 + amp * std::sin(tau * x); };
  else if (kind == "cos") f = [&](double x) { return 1.0 + amp * std::cos(tau * x); };
  else if (kind == "exp-cos") f = [&](double x) { return std::exp(amp * std::cos(tau * x)); };
  else throw ConfigError("initial.kind", "unknown initial density kind '" + kind + "'");
  try {
    return GridDensity::from_function(G, f);
  } catch (const Error& e) {
    throw ConfigError("initial", e.what());
  }
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorKind::Config, "cannot write " + p.string());
  os << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

template <class F>
void write_stream(const fs::path& p, F&& f) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorKind::Config, "cannot write " + p.string());
  f(os);
}

struct Context {
  const json& cfg;
  fs::path out;
  json resolved = json::object();
};

// ---- experiments --------------------------------------------------------------------

json run_sto_iterate(Context& c) {
  const MapPtr map = get_map(c.cfg);
  const CouplingPtr coupling = get_coupling(c.cfg);
  const double delta = get_number(c.cfg, "delta");
  const double a = get_number(c.cfg, "cone.a");
  if (!(a > 0.0)) throw ConfigError("cone.a", "cone.a must be positive");
  const std::size_t G = get_grid(c.cfg, lookup(c.cfg, "noise") ? 1024 : 256);
  const std::optional<NoiseKernel> noise = get_noise(c.cfg, map->expansion(), delta, G, c.resolved);
  const StoProblem problem{map, coupling, delta, noise};
  const GridDensity phi0 = get_initial(c.cfg, G, "constant", 0.0);

  FixedPointOptions opt;
  opt.a = a;
  opt.tol = get_number(c.cfg, "iteration.tol", 1e-10);
  opt.max_iters = static_cast<int>(get_positive(c.cfg, "iteration.max_iters", 100));
  opt.entry_iters = static_cast<int>(get_int(c.cfg, "iteration.entry_iters", 0));
  c.resolved["grid_G"] = G;
  c.resolved["iteration"] = {{"tol", opt.tol}, {"max_iters", opt.max_iters}, {"entry_iters", opt.entry_iters}};

  const IterationTrace trace = fixed_point_iterate(problem, phi0, opt);
  write_stream(c.out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
  json report = to_json(trace);
  report["distance_to_lebesgue"] = sup_distance(trace.final().values(), GridDensity::constant(G).values());
  return report;
}

json run_stability_check(Context& c) {
  const MapPtr map = get_map(c.cfg);
  const CouplingPtr coupling = get_coupling(c.cfg);
  const double delta = get_number(c.cfg, "delta");
  const StabilityReport r = stability_condition(*coupling, map->expansion(), delta);
  c.resolved["stability"] = r;
  json report = r;
  report["in_dirac_window"] = r.dirac_window.contains(delta);
  report["in_basin_window"] = r.basin_window.contains(delta);
  if (r.basin_window.contains(delta)) {
    report["Delta_auto"] = delta_max_trap(delta, map->expansion(), 0.95);
    c.resolved["Delta_auto"] = report["Delta_auto"];
  }
  write_stream(c.out / "trace.csv", [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "quantity,value\n";
    os << "norm_d1," << r.norm_d1 << "\nnorm_d2," << r.norm_d2 << "\nthreshold," << r.threshold
       << "\nlhs," << r.lhs << "\ndirac_lo," << r.dirac_window.lo << "\ndirac_hi," << r.dirac_window.hi
       << "\nbasin_lo," << r.basin_window.lo << "\nbasin_hi," << r.basin_window.hi << '\n';
  });
  return report;
}

json run_hilbert_validate(Context& c) {
  const json& av = need(c.cfg, "cone.a");
  std::vector<double> as;
  if (av.is_array()) {
    for (const auto& e : av) as.push_back(e.get<double>());
  } else {
    as.push_back(get_number(c.cfg, "cone.a"));
  }
  for (double a : as) {
    if (!(a > 0.0)) throw ConfigError("cone.a", "cone.a must be positive");
  }
  const std::uint64_t seed = get_seed(c.cfg);
  const int pairs = static_cast<int>(get_positive(c.cfg, "samples", 50));
  const std::size_t G = get_grid(c.cfg, 256);
  c.resolved["grid_G"] = G;

  struct Row {
    double a, closed, brute;
  };
  std::vector<Row> rows(as.size() * static_cast<std::size_t>(pairs));
  const auto total = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const std::size_t ai = u / static_cast<std::size_t>(pairs);
    const double a = as[ai];
    Stream rng(seed, ai, u % static_cast<std::size_t>(pairs));
    const GridDensity phi = random_cone_element(G, a * (0.1 + 0.8 * rng.uniform()), rng);
    const GridDensity psi = random_cone_element(G, a * (0.1 + 0.8 * rng.uniform()), rng);
    rows[u] = {a, hilbert_metric(phi, psi, a), hilbert_metric_bruteforce(phi, psi, a)};
  }
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.closed - r.brute));
  write_stream(c.out / "trace.csv", [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "a,pair,closed_form,brute_force,abs_diff\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << rows[i].a << ',' << i % static_cast<std::size_t>(pairs) << ',' << rows[i].closed << ','
         << rows[i].brute << ',' << std::abs(rows[i].closed - rows[i].brute) << '\n';
    }
  });
  return {{"pairs", rows.size()}, {"max_abs_diff", worst}};
}

json run_order_check(Context& c) {
  const MapPtr map = get_map(c.cfg);
  const CouplingPtr coupling = get_coupling(c.cfg);
  const double delta = get_number(c.cfg, "delta");
  const double a = get_number(c.cfg, "cone.a");
  if (!(a > 0.0)) throw ConfigError("cone.a", "cone.a must be positive");
  const double alpha = get_number(c.cfg, "cone.alpha", 10.0 * a);
  const std::uint64_t seed = get_seed(c.cfg);
  const int samples = static_cast<int>(get_positive(c.cfg, "samples", 200));
  const std::size_t G = get_grid(c.cfg, 256);
  const std::optional<NoiseKernel> noise = get_noise(c.cfg, map->expansion(), delta, G, c.resolved);
  c.resolved["grid_G"] = G;
  c.resolved["cone"] = {{"a", a}, {"alpha", alpha}};
  const StoProblem problem{map, coupling, delta, noise};
  const OrderCheckReport r = order_preservation_check(problem, a, alpha, samples, seed, G);
  const ContractionProbe p = cone_contraction_probe(problem, a, samples, seed, G);
  write_stream(c.out / "trace.csv", [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "check,samples,failures,worst_log_lip\n";
    os << "order," << r.pairs << ',' << r.order_failures << ',' << r.worst_order_log_lip << '\n';
    os << "differential," << r.directions << ',' << r.differential_failures << ','
       << r.worst_differential_log_lip << '\n';
  });
  return {{"order", r}, {"contraction", p}};
}

ChainConfig chain_config(Context& c, bool need_noise) {
  ChainConfig cfg;
  cfg.k = chain_k(c.cfg);
  cfg.delta = get_number(c.cfg, "delta");
  cfg.seed = get_seed(c.cfg);
  cfg.T_max = get_positive(c.cfg, "chain.T_max");
  cfg.record_every = static_cast<int>(get_positive(c.cfg, "chain.record_every", 1));
  cfg.post_absorption_steps = get_int(c.cfg, "chain.post_absorption_steps", 100);
  cfg.kernel = get_noise(c.cfg, cfg.k, cfg.delta, get_grid(c.cfg, 1024), c.resolved, need_noise);
  return cfg;
}

json run_ensemble(Context& c) {
  ChainConfig cfg = chain_config(c, false);
  cfg.N = static_cast<int>(get_positive(c.cfg, "chain.N"));
  cfg.stop_at_absorption = false;
  const std::string start = get_string(c.cfg, "start.kind", "uniform");
  ParticleEnsemble x0 = uniform_ensemble(cfg.N, cfg.seed);
  if (start == "interval") {
    const double eps = get_number(c.cfg, "start.epsilon");
    std::vector<double> v(static_cast<std::size_t>(cfg.N));
    for (std::size_t i = 0; i < v.size(); ++i) {
      Stream rng(cfg.seed, 0, 0, i);
      v[i] = wrap(eps * (2.0 * rng.uniform() - 1.0));
    }
    x0 = ParticleEnsemble(std::move(v));
  } else if (start != "uniform") {
    throw ConfigError("start.kind", "start.kind must be 'uniform' or 'interval'");
  }
  const ChainTrace t = run_chain(cfg, x0);
  write_stream(c.out / "trace.csv", [&](std::ostream& os) { write_csv(os, t); });
  return to_json(t);
}

json run_metastable(Context& c) {
  ChainConfig cfg = chain_config(c, true);
  const std::vector<int> N_list = get_int_list(c.cfg, "chain.N_list");
  const int replicas = static_cast<int>(get_positive(c.cfg, "chain.replicas"));
  const auto rows = absorption_scaling(cfg, N_list, replicas, cfg.seed);
  long violations = 0;
  for (const auto& r : rows) violations += r.invariance_violations;

  json report;
  report["absorption"] = rows;
  report["strictly_increasing"] = strictly_increasing_means(rows);

  // density fixed point of the noisy operator
  const std::size_t G = get_grid(c.cfg, 1024);
  const StoProblem problem{get_map(c.cfg), make_coupling("sincos"), cfg.delta, cfg.kernel};
  const IterationTrace fp = power_iterate(problem, GridDensity::constant(G), 1e-12, 500);
  report["fixed_point"] = {{"converged", fp.converged},
                           {"iterations", fp.n_iters},
                           {"distance_to_lebesgue", sup_distance(fp.final().values(), GridDensity::constant(G).values())}};

  if (lookup(c.cfg, "chain.N")) {
    ChainConfig long_run = cfg;
    long_run.N = static_cast<int>(get_positive(c.cfg, "chain.N"));
    long_run.stop_at_absorption = false;
    long_run.T_max = get_positive(c.cfg, "chain.T_long", cfg.T_max);
    const ChainTrace t = run_chain(long_run, uniform_ensemble(long_run.N, cfg.seed, 1ULL << 62));
    violations += t.invariance_violations;
    report["long_chain"] = to_json(t);
  }
  report["invariance_violations"] = violations;
  write_stream(c.out / "trace.csv", [&](std::ostream& os) { write_csv(os, rows); });
  return report;
}

json run_lln(Context& c) {
  const MapPtr map = get_map(c.cfg);
  const CouplingPtr coupling = get_coupling(c.cfg);
  const double delta = get_number(c.cfg, "delta");
  const std::size_t G = get_grid(c.cfg, 1024);
  const std::optional<NoiseKernel> noise = get_noise(c.cfg, map->expansion(), delta, G, c.resolved);
  const std::vector<int> N_list = get_int_list(c.cfg, "chain.N_list");
  const int replicas = static_cast<int>(get_positive(c.cfg, "chain.replicas", 1));
  const GridDensity phi = get_initial(c.cfg, G, "cos", 0.3);
  c.resolved["grid_G"] = G;
  const LlnResult r = lln_one_step(phi, N_list, *map, *coupling, delta, noise, get_seed(c.cfg), replicas);
  write_stream(c.out / "trace.csv", [&](std::ostream& os) { write_csv(os, r); });
  return r;
}

json run_dirac_basin(Context& c) {
  const double k = chain_k(c.cfg);
  const double delta = get_number(c.cfg, "delta");
  const double eps = get_number(c.cfg, "epsilon");
  const int n_steps = static_cast<int>(get_int(c.cfg, "n_steps"));
  if (n_steps < 0) throw ConfigError("n_steps", "n_steps must be >= 0");
  const int N = static_cast<int>(get_positive(c.cfg, "chain.N"));
  const auto series = dirac_basin_run(eps, delta, k, n_steps, N, get_seed(c.cfg));
  c.resolved["dirac_window"] = dirac_window(k);
  write_stream(c.out / "trace.csv", [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "step,dW_to_dirac0\n";
    for (std::size_t n = 0; n < series.size(); ++n) os << n << ',' << series[n] << '\n';
  });
  json report = {{"final_dW_to_dirac0", series.back()}, {"in_dirac_window", dirac_window(k).contains(delta)}};
  std::optional<int> first;
  for (std::size_t n = 0; n < series.size(); ++n) {
    if (series[n] < 1e-6) {
      first = static_cast<int>(n);
      break;
    }
  }
  report["first_step_below_1e-6"] = first ? json(*first) : json(nullptr);
  return report;
}

}  // namespace

json run_experiment(const json& config, const fs::path& output_dir) {
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
  const std::string name = need(config, "experiment").is_string()
                               ? config.at("experiment").get<std::string>()
                               : throw ConfigError("experiment", "field 'experiment' must be a string");
  using Runner = json (*)(Context&);
  static const std::map<std::string, Runner> runners = {
      {"sto-iterate", run_sto_iterate},   {"stability-check", run_stability_check},
      {"hilbert-validate", run_hilbert_validate}, {"order-check", run_order_check},
      {"ensemble", run_ensemble},         {"metastable", run_metastable},
      {"lln", run_lln},                   {"dirac-basin", run_dirac_basin},
  };
  const auto it = runners.find(name);
  if (it == runners.end()) throw ConfigError("experiment", "unknown experiment '" + name + "'");

  fs::create_directories(output_dir);
  Context ctx{config, output_dir};
  const auto t0 = std::chrono::steady_clock::now();
  json report = it->second(ctx);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest = config;
  manifest["stolab_version"] = library_version();
  manifest["resolved"] = ctx.resolved;
  write_json(output_dir / "manifest.json", manifest);

  json wrapped = {{"status", "ok"}, {"experiment", name}, {"runtime_seconds", seconds}, {"result", report}};
  write_json(output_dir / "report.json", wrapped);
  return wrapped;
}

int run_config_file(const fs::path& config_path, const std::optional<fs::path>& output_override,
                    json* error) {
  fs::path out = output_override.value_or(fs::path("."));
  try {
    std::ifstream is(config_path);
    if (!is) throw ConfigError("", "cannot open config file " + config_path.string());
    json cfg;
    try {
      cfg = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
    if (!output_override && cfg.is_object() && cfg.contains("output_dir")) {
      if (!cfg["output_dir"].is_string()) throw ConfigError("output_dir", "field 'output_dir' must be a string");
      out = cfg["output_dir"].get<std::string>();
    }
    run_experiment(cfg, out);
    return 0;
  } catch (const std::exception& e) {
    json j = error_json(e);
    if (error) *error = j;
    try {
      fs::create_directories(out);
      write_json(out / "error.json", j);
    } catch (...) {
    }
    return 1;
  }
}

}  // namespace stolab
