// wavekin: batch interface to the particle simulator, the deterministic
// solver and the validation layer.
//
// Exit status: 0 success, 2 configuration error, 3 runtime error or a failed
// check.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "wavekin/analysis.hpp"
#include "wavekin/collision.hpp"
#include "wavekin/initial.hpp"
#include "wavekin/kernels.hpp"
#include "wavekin/parallel.hpp"
#include "wavekin/particle.hpp"
#include "wavekin/simd/kernels.hpp"
#include "wavekin/solver.hpp"
#include "wavekin/trajectory_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wavekin;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options that can be replayed from a manifest. Flags given on the command
// line win over manifest values.
class Registry {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& var,
                   const std::string& desc) {
    auto* opt = app->add_option(flag, var, desc)->capture_default_str();
    fields_.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); },
                       [&var] { return json(var); }});
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, const std::string& key, bool& var,
                    const std::string& desc) {
    auto* opt = app->add_flag(flag, var, desc);
    fields_.push_back({key, opt, [&var](const json& j) { var = j.get<bool>(); },
                       [&var] { return json(var); }});
    return opt;
  }

  void apply(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("manifest 'config' must be an object");
    for (const auto& [key, value] : cfg.items()) {
      auto it = std::find_if(fields_.begin(), fields_.end(),
                             [&](const Field& f) { return f.key == key; });
      if (it == fields_.end()) throw ConfigError("unknown config key '" + key + "' in manifest");
      if (it->opt->count() > 0) continue;
      try {
        it->from(value);
      } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
    }
  }

  json dump() const {
    json j = json::object();
    for (const auto& f : fields_) j[f.key] = f.to();
    return j;
  }

 private:
  struct Field {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> from;
    std::function<json()> to;
  };
  std::vector<Field> fields_;
};

struct Common {
  std::string out;
  std::string config;
  std::string isa = "auto";
  unsigned threads = 0;
  CLI::Option* isa_opt = nullptr;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output directory (default $WAVEKIN_OUT/<subcommand>)");
  app->add_option("--config", c.config, "Replay the configuration stored in a manifest.json");
  c.isa_opt = app->add_option("--isa", c.isa, "Inner loops: auto, scalar, avx2")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads for replicas (0 = all cores)");
}

fs::path out_dir(const Common& c, const std::string& sub) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("WAVEKIN_OUT");
  return fs::path(root && *root ? root : "wavekin-out") / sub;
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ConfigError("cannot open '" + p.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

void select_isa(const std::string& name) {
  if (name == "auto") {
    simd::set_active_isa(simd::detected_isa());
    return;
  }
  try {
    simd::set_active_isa(simd::parse_isa(name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--isa: ") + e.what());
  }
}

// Applies --config (if any) and the ISA choice.
void load_config(Common& c, const std::string& sub, Registry& reg) {
  if (!c.config.empty()) {
    const json m = read_json(c.config);
    if (!m.is_object() || m.value("schema", 0) != 1) throw ConfigError("manifest schema must be 1");
    const std::string wrote = m.value("subcommand", std::string("?"));
    if (wrote != sub) throw ConfigError("manifest was written by '" + wrote + "', not '" + sub + "'");
    if (!m.contains("config")) throw ConfigError("manifest has no 'config' object");
    reg.apply(m.at("config"));
    if (c.isa_opt->count() == 0 && m.contains("isa") && m["isa"].is_string()) c.isa = m["isa"];
  }
  select_isa(c.isa);
}

json manifest(const std::string& sub, const Registry& reg) {
  json m;
  m["schema"] = 1;
  m["subcommand"] = sub;
  m["version"] = WAVEKIN_VERSION;
  m["isa"] = std::string(simd::isa_name(simd::active_isa()));
  m["config"] = reg.dump();
  return m;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  os << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::vector<double> uniform_times(double t_end, std::size_t intervals) {
  std::vector<double> ts;
  for (std::size_t k = 0; k <= intervals; ++k) {
    ts.push_back(t_end * static_cast<double>(k) / static_cast<double>(intervals));
  }
  return ts;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ConfigError(std::string("malformed number '") + item + "' in " + what);
    }
    out.push_back(v);
  }
  return out;
}

std::string describe(const SpecError& e) {
  return std::string(e.what()) + " (field '" + e.field() + "', position " +
         std::to_string(e.position()) + ")";
}

Kernel kernel_arg(const std::string& s) { return parse_kernel(s); }
WeightFunction weight_arg(const std::string& s) { return parse_weight(s); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool on_grid(double x, double h) {
  const double r = x / h;
  return std::abs(r - std::nearbyint(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

// Witness search for the thinning bound on the reachable box [0, omega]^3.
void check_envelope(const Kernel& k, const WeightFunction& w, double omega) {
  std::vector<Triple> samples;
  constexpr int kSteps = 24;
  for (int a = 0; a <= kSteps; ++a)
    for (int b = 0; b <= kSteps; ++b)
      for (int c = 0; c <= kSteps; ++c)
        samples.push_back({omega * a / kSteps, omega * b / kSteps, omega * c / kSteps});
  const auto r = check_submultiplicative(as_fn(k), w, samples);
  if (!r.pass) {
    throw SubmultiplicativityError(
        "kernel " + k.spec() + " is not sub-multiplicative for weight " + w.spec() +
            " on the reachable box [0, " + format_double(omega) + "]^3: witness (" +
            format_double(r.witness[0]) + ", " + format_double(r.witness[1]) + ", " +
            format_double(r.witness[2]) + "), K/(phi phi phi) = " + format_double(r.worst),
        r.witness[0], r.witness[1], r.witness[2], r.worst);
  }
}

std::string replica_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "replica_%04zu", r);
  return buf;
}

json conservation_json(const std::vector<MomentSample>& samples, bool particle) {
  return json::parse(to_json(conservation_report(samples, particle)));
}

json counters_json(const Trajectory& t) {
  json j;
  j["candidates"] = t.candidates;
  j["accepted"] = t.accepted;
  j["escapes"] = t.escapes;
  j["kills"] = t.kills;
  j["final_lambda_count"] = t.final_lambda_count;
  j["final_lambda_cells"] = t.final_lambda_cells;
  return j;
}

void write_particle_run(const fs::path& dir, const Trajectory& traj, bool events, bool snapshots) {
  fs::create_directories(dir);
  write_moments_csv(dir / "moments.csv", traj.samples);
  if (events) write_events_jsonl(dir / "events.jsonl", traj);
  if (snapshots) {
    std::vector<double> times;
    for (const auto& s : traj.samples) times.push_back(s.t);
    write_snapshots(dir / "snapshots", times, traj.snapshots);
  }
  write_json(dir / "conservation.json", conservation_json(traj.samples, true));
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  std::string kernel = "product:lambda=1";
  std::string weight = "affine";
  std::string mu0 = "exp:mean=1";
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double h = 0x1.0p-20;
  double t_end = 1.0;
  std::size_t samples = 10;
  std::size_t replicas = 1;
  bool events = false;
  bool snapshots = false;
  double bound = -1.0;
  double bound_large = -1.0;
  std::size_t max_events = 50'000'000;
  Registry reg;
};

void setup_simulate(CLI::App* app, SimulateArgs& a) {
  add_common(app, a.common);
  auto& r = a.reg;
  r.add(app, "--kernel", "kernel", a.kernel, "Kernel spec, e.g. product:lambda=1");
  r.add(app, "--weight", "weight", a.weight, "Weight function: affine | fractional:gamma=G");
  r.add(app, "--mu0", "mu0", a.mu0, "Initial law: exp:mean=M | delta:w=W | two:w1=..,w2=..,p=.. | file:PATH");
  r.add(app, "--n", "n", a.n, "Number of particles");
  r.add(app, "--seed", "seed", a.seed, "Base seed; replica r uses stream r");
  r.add(app, "--h", "h", a.h, "Grid resolution");
  r.add(app, "--t-end", "t_end", a.t_end, "Final time");
  r.add(app, "--samples", "samples", a.samples, "Number of equal sampling intervals");
  r.add(app, "--replicas", "replicas", a.replicas, "Independent replicas");
  r.flag(app, "--events", "events", a.events, "Write the event log (events.jsonl)");
  r.flag(app, "--snapshots", "snapshots", a.snapshots, "Write empirical measure snapshots");
  r.add(app, "--bound", "bound", a.bound, "Truncation bound B (negative: untruncated)");
  r.add(app, "--bound-large", "bound_large", a.bound_large, "Second bound B' >= B for a coupled run");
  r.add(app, "--max-events", "max_events", a.max_events, "Abort after this many accepted events");
}

int run_simulate(SimulateArgs& a) {
  // Configuration phase.
  Kernel k = Kernel::constant(0.0);
  WeightFunction w = WeightFunction::affine();
  InitialSpec init;
  SimOptions opt;
  fs::path out;
  try {
    load_config(a.common, "simulate", a.reg);
    k = kernel_arg(a.kernel);
    w = weight_arg(a.weight);
    init = parse_initial(a.mu0);
    require(a.n >= 2, "n >= 2 required");
    require(a.h > 0.0 && std::isfinite(a.h), "h must be positive");
    require(a.t_end >= 0.0 && std::isfinite(a.t_end), "t-end must be nonnegative");
    require(a.samples >= 1, "samples >= 1 required");
    require(a.replicas >= 1, "replicas >= 1 required");
    const bool truncated = a.bound >= 0.0;
    if (truncated) require(w.kind() == WeightKind::Affine, "truncated runs need the affine weight");
    if (a.bound_large >= 0.0) {
      require(truncated, "--bound-large needs --bound");
      require(a.bound_large >= a.bound, "--bound-large must be >= --bound");
    }
    require(!(a.events && a.bound_large >= 0.0), "--events is not supported for coupled runs");
    opt.t_end = a.t_end;
    opt.sample_times = uniform_times(a.t_end, a.samples);
    opt.snapshots = a.snapshots;
    opt.record_events = a.events;
    opt.max_events = a.max_events;
    out = out_dir(a.common, "simulate");
  } catch (const SpecError& e) {
    std::cerr << "wavekin simulate: " << describe(e) << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "wavekin simulate: " << e.what() << "\n";
    return kConfig;
  }

  // Run phase.
  fs::create_directories(out);
  json m = manifest("simulate", a.reg);
  m["seed"] = a.seed;
  std::vector<json> summaries(a.replicas);
  parallel_for(a.replicas, a.common.threads, [&](std::size_t r) {
    Rng rng(a.seed, r);
    ParticleState state = initial_particles(init, a.n, a.h, rng);
    check_envelope(k, w, static_cast<double>(state.cell_sum()) * a.h);
    const fs::path dir = out / replica_name(r);
    json s;
    s["stream"] = r;
    if (a.bound_large >= 0.0) {
      const CoupledResult c = simulate_coupled(state, a.bound, a.bound_large, k, opt, rng);
      write_particle_run(dir / "small", c.small, false, a.snapshots);
      write_particle_run(dir / "large", c.large, false, a.snapshots);
      s["small"] = counters_json(c.small);
      s["large"] = counters_json(c.large);
      s["domination_checks"] = c.domination_checks;
    } else if (a.bound >= 0.0) {
      TruncatedParticles tp = truncate(state, a.bound);
      const Trajectory t = simulate_truncated(tp, k, opt, rng);
      write_particle_run(dir, t, a.events, a.snapshots);
      s["counters"] = counters_json(t);
    } else {
      const Trajectory t = simulate(state, k, w, opt, rng);
      write_particle_run(dir, t, a.events, a.snapshots);
      s["counters"] = counters_json(t);
    }
    summaries[r] = std::move(s);
  });
  m["replicas"] = summaries;
  write_json(out / "manifest.json", m);
  std::cout << "simulate: " << a.replicas << " replica(s) of n = " << a.n << " written to "
            << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  Common common;
  std::string kernel = "product:lambda=1";
  std::string mu0 = "exp:mean=1";
  double lambda0 = 0.0;
  double h = 1.0 / 64.0;
  double bound = 4.0;
  std::string method = "rk4";
  double dt = 0.0;
  double t_end = 1.0;
  std::size_t samples = 10;
  std::string truncation = "overflow";
  std::size_t richardson = 0;
  std::string schedule;
  Registry reg;
};

void setup_solve(CLI::App* app, SolveArgs& a) {
  add_common(app, a.common);
  auto& r = a.reg;
  r.add(app, "--kernel", "kernel", a.kernel, "Kernel spec");
  r.add(app, "--mu0", "mu0", a.mu0, "Initial measure (see simulate)");
  r.add(app, "--lambda0", "lambda0", a.lambda0, "Initial overflow scalar");
  r.add(app, "--h", "h", a.h, "Grid resolution");
  r.add(app, "--bound", "bound", a.bound, "Truncation bound B, a multiple of h");
  r.add(app, "--method", "method", a.method, "euler | rk4 | if-euler");
  r.add(app, "--dt", "dt", a.dt, "Time step (0: automatic)");
  r.add(app, "--t-end", "t_end", a.t_end, "Final time");
  r.add(app, "--samples", "samples", a.samples, "Number of equal sampling intervals");
  r.add(app, "--truncation", "truncation", a.truncation, "overflow | conservative");
  r.add(app, "--richardson", "richardson", a.richardson,
        "Also run dt, dt/2, .. with this many levels (0: off)");
  r.add(app, "--schedule", "schedule", a.schedule,
        "Comma-separated increasing bounds for a truncation-limit run");
}

json samples_json(const std::vector<MomentSample>& ss) {
  json arr = json::array();
  for (const auto& s : ss) arr.push_back({s.t, s.Lambda.value_or(0.0)});
  return arr;
}

int run_solve(SolveArgs& a) {
  Kernel k = Kernel::constant(0.0);
  DiscreteMeasure mu0;
  SolverConfig cfg;
  std::vector<double> schedule;
  fs::path out;
  try {
    load_config(a.common, "solve", a.reg);
    k = kernel_arg(a.kernel);
    const InitialSpec init = parse_initial(a.mu0);
    require(a.h > 0.0 && std::isfinite(a.h), "h must be positive");
    require(a.bound >= 0.0 && on_grid(a.bound, a.h), "bound must be a nonnegative multiple of h");
    require(a.t_end >= 0.0 && std::isfinite(a.t_end), "t-end must be nonnegative");
    require(a.dt >= 0.0, "dt must be nonnegative");
    require(a.lambda0 >= 0.0, "lambda0 must be nonnegative");
    require(a.samples >= 1, "samples >= 1 required");
    require(a.richardson != 1, "richardson needs at least 2 levels");
    cfg.method = parse_method(a.method);
    if (a.truncation == "overflow") {
      cfg.truncation = Truncation::Overflow;
    } else if (a.truncation == "conservative") {
      cfg.truncation = Truncation::Conservative;
    } else {
      throw ConfigError("truncation must be 'overflow' or 'conservative'");
    }
    cfg.dt = a.dt;
    cfg.t_end = a.t_end;
    cfg.h = a.h;
    cfg.bound = a.bound;
    cfg.sample_times = uniform_times(a.t_end, a.samples);
    schedule = parse_list(a.schedule, "--schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      require(on_grid(schedule[i], a.h), "schedule bounds must be multiples of h");
      require(i == 0 || schedule[i] > schedule[i - 1], "schedule must be increasing");
    }
    const std::size_t cells = static_cast<std::size_t>(std::nearbyint(a.bound / a.h)) + 1;
    mu0 = initial_measure(init, a.h, cells);
    out = out_dir(a.common, "solve");
  } catch (const SpecError& e) {
    std::cerr << "wavekin solve: " << describe(e) << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "wavekin solve: " << e.what() << "\n";
    return kConfig;
  }

  fs::create_directories(out);
  json m = manifest("solve", a.reg);
  const SolveResult res = solve_truncated(mu0, a.lambda0, k, cfg);
  write_moments_csv(out / "moments.csv", res.samples);
  write_snapshots(out / "snapshots", res.times, res.snapshots);
  write_measure_csv((out / "final.csv").string(), DiscreteMeasure::from_dense(res.final_u, res.h));
  json cons = conservation_json(res.samples, false);
  cons["conservation_residual"] = res.conservation_residual;
  write_json(out / "conservation.json", cons);
  m["steps"] = res.steps;
  m["dt"] = res.dt;
  m["cells"] = res.cells;
  m["lambda_trace"] = samples_json(res.samples);
  std::cout << "solve: " << res.steps << " steps of dt <= " << format_double(res.dt)
            << ", conservation residual " << format_double(res.conservation_residual) << "\n";

  if (a.richardson >= 2) {
    const RichardsonReport rr = richardson(mu0, a.lambda0, k, cfg, a.richardson);
    json j;
    j["schema"] = 1;
    j["dts"] = rr.dts;
    j["diffs"] = rr.diffs;
    j["ratios"] = rr.ratios;
    j["observed_order"] = rr.observed_order;
    write_json(out / "richardson.json", j);
    std::cout << "richardson (" << method_name(cfg.method) << "):\n";
    for (std::size_t i = 0; i < rr.diffs.size(); ++i) {
      std::cout << "  dt " << format_double(rr.dts[i]) << "  |u_dt - u_dt/2| "
                << format_double(rr.diffs[i]);
      if (i < rr.ratios.size()) std::cout << "  ratio " << format_double(rr.ratios[i]);
      std::cout << "\n";
    }
    std::cout << "  observed order " << format_double(rr.observed_order) << "\n";
  }

  if (!schedule.empty()) {
    const LimitResult lr = solve_limit(mu0, k, cfg, schedule);
    json j;
    j["schema"] = 1;
    j["bounds"] = lr.bounds;
    j["max_monotonicity_violation"] = lr.max_monotonicity_violation;
    j["max_conservation_spread"] = lr.max_conservation_spread;
    json traces = json::array();
    for (const auto& run : lr.runs) traces.push_back(samples_json(run.samples));
    j["lambda_traces"] = traces;
    write_json(out / "limit.json", j);
    std::cout << "limit: monotone in B, conserved spread "
              << format_double(lr.max_conservation_spread) << "\n";
  }
  write_json(out / "manifest.json", m);
  return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  Common common;
  std::vector<std::string> ensembles;
  std::string reference;
  std::string weight;
  Registry reg;
};

void setup_compare(CLI::App* app, CompareArgs& a) {
  add_common(app, a.common);
  a.reg.add(app, "--ensemble", "ensembles", a.ensembles, "simulate output directory (repeatable)");
  a.reg.add(app, "--reference", "reference", a.reference, "solve output directory");
  a.reg.add(app, "--weight", "weight", a.weight, "Weight function (default: the ensemble's)");
}

Snapshots load_snapshots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("missing snapshot directory '" + dir.string() + "'");
  return read_snapshots(dir);
}

int run_compare(CompareArgs& a) {
  std::map<std::size_t, std::vector<Snapshots>> ens;
  Snapshots ref;
  WeightFunction w = WeightFunction::affine();
  fs::path out;
  try {
    load_config(a.common, "compare", a.reg);
    require(!a.ensembles.empty(), "at least one --ensemble is required");
    require(!a.reference.empty(), "--reference is required");
    require(fs::is_directory(a.reference), "missing directory '" + a.reference + "'");
    ref = load_snapshots(fs::path(a.reference) / "snapshots");
    std::string weight = a.weight;
    for (const auto& e : a.ensembles) {
      require(fs::is_directory(e), "missing directory '" + e + "'");
      const json m = read_json(fs::path(e) / "manifest.json");
      const std::string sub = m.value("subcommand", std::string());
      if (sub == "solve") {
        ens[0].push_back(load_snapshots(fs::path(e) / "snapshots"));
        continue;
      }
      require(sub == "simulate", "'" + e + "' is not a simulate or solve directory");
      const json& c = m.at("config");
      require(c.value("bound", -1.0) < 0.0, "'" + e + "' is a truncated run");
      if (weight.empty()) weight = c.value("weight", std::string("affine"));
      const auto n = c.at("n").get<std::size_t>();
      const auto reps = c.at("replicas").get<std::size_t>();
      for (std::size_t r = 0; r < reps; ++r) {
        ens[n].push_back(load_snapshots(fs::path(e) / replica_name(r) / "snapshots"));
      }
    }
    w = weight_arg(weight.empty() ? "affine" : weight);
    for (const auto& [n, reps] : ens) {
      for (const auto& s : reps) require(s.times == ref.times, "sample times differ from the reference grid");
    }
    out = out_dir(a.common, "compare");
  } catch (const SpecError& e) {
    std::cerr << "wavekin compare: " << describe(e) << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "wavekin compare: " << e.what() << "\n";
    return kConfig;
  }

  fs::create_directories(out);
  const ConvergenceReport r = mean_field_convergence(ens, ref, w);
  write_text(out / "convergence.json", to_json(r));
  write_text(out / "convergence.txt", to_text(r));
  write_json(out / "manifest.json", manifest("compare", a.reg));
  std::cout << to_text(r);
  return kOk;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  Common common;
  std::string kernel = "product:lambda=1";
  std::string weight = "affine";
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double max = 100.0;
  Registry reg;
};

void setup_validate(CLI::App* app, ValidateArgs& a) {
  add_common(app, a.common);
  auto& r = a.reg;
  r.add(app, "--kernel", "kernel", a.kernel, "Kernel spec");
  r.add(app, "--weight", "weight", a.weight, "Weight function");
  r.add(app, "--samples", "samples", a.samples, "Random triples");
  r.add(app, "--seed", "seed", a.seed, "Seed for the random triples");
  r.add(app, "--max", "max", a.max, "Triples are drawn from [0, max]^3");
}

json check_json(const CheckReport& r) {
  json j;
  j["pass"] = r.pass;
  j["worst"] = r.worst;
  j["witness"] = {r.witness[0], r.witness[1], r.witness[2]};
  return j;
}

int run_validate(ValidateArgs& a) {
  Kernel k = Kernel::constant(0.0);
  WeightFunction w = WeightFunction::affine();
  fs::path out;
  try {
    load_config(a.common, "validate", a.reg);
    k = kernel_arg(a.kernel);
    w = weight_arg(a.weight);
    require(a.max > 0.0 && std::isfinite(a.max), "max must be positive");
    out = out_dir(a.common, "validate");
  } catch (const SpecError& e) {
    std::cerr << "wavekin validate: " << describe(e) << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "wavekin validate: " << e.what() << "\n";
    return kConfig;
  }

  std::vector<Triple> triples;
  Rng rng(a.seed, 0);
  for (std::size_t i = 0; i < a.samples; ++i) {
    triples.push_back({a.max * rng.uniform(), a.max * rng.uniform(), a.max * rng.uniform()});
  }
  constexpr int kSteps = 10;
  for (int x = 0; x <= kSteps; ++x)
    for (int y = 0; y <= kSteps; ++y)
      for (int z = 0; z <= kSteps; ++z)
        triples.push_back({a.max * x / kSteps, a.max * y / kSteps, a.max * z / kSteps});
  const std::vector<double> scales{0.5, 2.0, 10.0};
  const KernelFn fn = as_fn(k);
  const CheckReport sym = check_symmetry(fn, triples);
  const CheckReport hom = check_homogeneity(fn, k.degree(), triples, scales);
  const CheckReport sub = check_submultiplicative(fn, w, triples);

  fs::create_directories(out);
  json j;
  j["schema"] = 1;
  j["kernel"] = k.spec();
  j["weight"] = w.spec();
  j["triples"] = triples.size();
  j["symmetry"] = check_json(sym);
  j["homogeneity"] = check_json(hom);
  j["homogeneity"]["degree"] = k.degree();
  j["submultiplicative"] = check_json(sub);
  const bool pass = sym.pass && hom.pass && sub.pass;
  j["pass"] = pass;
  write_json(out / "validate.json", j);
  write_json(out / "manifest.json", manifest("validate", a.reg));
  auto line = [](const char* name, const CheckReport& r) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << "  worst " << format_double(r.worst);
    if (!r.pass) {
      std::cout << "  witness (" << format_double(r.witness[0]) << ", "
                << format_double(r.witness[1]) << ", " << format_double(r.witness[2]) << ")";
    }
    std::cout << "\n";
  };
  std::cout << k.spec() << " with weight " << w.spec() << " on " << triples.size() << " triples\n";
  line("symmetry", sym);
  line("homogeneity", hom);
  line("sub-multiplicativity", sub);
  return pass ? kOk : kRuntime;
}

// ---------------------------------------------------------------- picard

struct PicardArgs {
  Common common;
  std::string kernel = "product:lambda=1";
  std::string mu0;
  double lambda0 = 0.0;
  double h = 1.0 / 16.0;
  double bound = 1.0;
  std::size_t iterations = 20;
  std::size_t steps = 64;
  Registry reg;
};

void setup_picard(CLI::App* app, PicardArgs& a) {
  add_common(app, a.common);
  auto& r = a.reg;
  r.add(app, "--kernel", "kernel", a.kernel, "Kernel spec");
  r.add(app, "--mu0", "mu0", a.mu0, "Initial measure (default: 1/2 (delta_h + delta_2h))");
  r.add(app, "--lambda0", "lambda0", a.lambda0, "Initial overflow scalar, below 1");
  r.add(app, "--h", "h", a.h, "Grid resolution");
  r.add(app, "--bound", "bound", a.bound, "Truncation bound B, a multiple of h");
  r.add(app, "--iterations", "iterations", a.iterations, "Number of Picard iterates");
  r.add(app, "--steps", "steps", a.steps, "Quadrature steps on [0, T]");
}

int run_picard(PicardArgs& a) {
  Kernel k = Kernel::constant(0.0);
  DiscreteMeasure mu0;
  fs::path out;
  double scale = 1.0;
  try {
    load_config(a.common, "picard", a.reg);
    k = kernel_arg(a.kernel);
    require(a.h > 0.0 && std::isfinite(a.h), "h must be positive");
    require(a.bound >= 2.0 * a.h && on_grid(a.bound, a.h), "bound must be a multiple of h, at least 2h");
    require(a.lambda0 >= 0.0 && a.lambda0 < 1.0, "lambda0 must lie in [0, 1)");
    require(a.iterations >= 2, "iterations >= 2 required");
    require(a.steps >= 1, "steps >= 1 required");
    const std::size_t cells = static_cast<std::size_t>(std::nearbyint(a.bound / a.h)) + 1;
    if (a.mu0.empty()) {
      InitialSpec s;
      s.kind = InitialSpec::Kind::Two;
      s.w1 = a.h;
      s.w2 = 2.0 * a.h;
      s.p = 0.5;
      mu0 = initial_measure(s, a.h, cells);
    } else {
      mu0 = initial_measure(parse_initial(a.mu0), a.h, cells);
    }
    // Rescale so that <phi, mu0> + lambda0 <= 1.
    const double budget = 1.0 - a.lambda0;
    const double phi = moments(mu0).phi;
    if (phi > budget) {
      scale = budget / phi;
      while (moments(mu0.scaled(scale)).phi > budget) scale = std::nextafter(scale, 0.0);
      mu0 = mu0.scaled(scale);
    }
    out = out_dir(a.common, "picard");
  } catch (const SpecError& e) {
    std::cerr << "wavekin picard: " << describe(e) << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "wavekin picard: " << e.what() << "\n";
    return kConfig;
  }

  const PicardReport r = picard(mu0, a.lambda0, k, a.h, a.bound, a.iterations, a.steps);
  fs::create_directories(out);
  json j;
  j["schema"] = 1;
  j["C"] = r.C;
  j["T"] = r.T;
  j["scale"] = scale;
  j["bound"] = r.bound;
  j["f_sup"] = r.f_sup;
  j["g_sup"] = r.g_sup;
  j["within_bound"] = r.within_bound;
  j["geometric"] = r.geometric;
  j["first_violation"] = r.first_violation;
  write_json(out / "picard.json", j);
  write_measure_csv((out / "mu0.csv").string(), mu0);
  write_json(out / "manifest.json", manifest("picard", a.reg));
  std::cout << "picard: C = " << format_double(r.C) << ", T = " << format_double(r.T) << "\n";
  for (std::size_t n = 0; n < r.f_sup.size(); ++n) {
    std::cout << "  n " << n << "  sup f " << format_double(r.f_sup[n]) << "  sup g "
              << format_double(r.g_sup[n]) << "\n";
  }
  std::cout << (r.within_bound ? "PASS" : "FAIL") << " sup f <= sqrt(2)\n";
  std::cout << (r.geometric ? "PASS" : "FAIL") << " geometric decay of g from n = 2\n";
  return r.within_bound && r.geometric ? kOk : kRuntime;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  Common common;
  std::string run;
  std::size_t replica = 0;
  std::string powerlaw;
  std::size_t bins = 16;
  Registry reg;
};

void setup_report(CLI::App* app, ReportArgs& a) {
  add_common(app, a.common);
  auto& r = a.reg;
  r.add(app, "run", "run", a.run, "A simulate or solve output directory");
  r.add(app, "--replica", "replica", a.replica, "Replica to report on (simulate runs)");
  r.add(app, "--powerlaw", "powerlaw", a.powerlaw,
        "lo,hi: exploratory power-law fit of the final snapshot over [lo, hi)");
  r.add(app, "--bins", "bins", a.bins, "Log-spaced bins for the power-law fit");
}

int run_report(ReportArgs& a) {
  fs::path data;
  fs::path out;
  std::vector<double> range;
  bool particle = false;
  try {
    load_config(a.common, "report", a.reg);
    require(!a.run.empty(), "a run directory is required");
    require(fs::is_directory(a.run), "missing directory '" + a.run + "'");
    const json m = read_json(fs::path(a.run) / "manifest.json");
    const std::string sub = m.value("subcommand", std::string());
    if (sub == "simulate") {
      particle = true;
      data = fs::path(a.run) / replica_name(a.replica);
      if (!fs::exists(data / "moments.csv")) data /= "small";
    } else if (sub == "solve") {
      data = a.run;
    } else {
      throw ConfigError("'" + a.run + "' is not a simulate or solve directory");
    }
    require(fs::exists(data / "moments.csv"), "no moments.csv under '" + data.string() + "'");
    range = parse_list(a.powerlaw, "--powerlaw");
    require(range.empty() || range.size() == 2, "--powerlaw takes lo,hi");
    if (!range.empty()) {
      require(fs::is_directory(data / "snapshots"), "the run has no snapshots for --powerlaw");
    }
    out = out_dir(a.common, "report");
  } catch (const std::exception& e) {
    std::cerr << "wavekin report: " << e.what() << "\n";
    return kConfig;
  }

  const auto samples = read_moments_csv(data / "moments.csv");
  json j;
  j["schema"] = 1;
  j["conservation"] = conservation_json(samples, false);
  std::cout << to_text(conservation_report(samples, false));
  if (particle && fs::exists(data / "conservation.json")) {
    const json exact = read_json(data / "conservation.json");
    j["exact_W"] = exact.value("exact_W", false);
    j["exact_E"] = exact.value("exact_E", false);
    std::cout << "integer conservation: W " << (j["exact_W"].get<bool>() ? "exact" : "drifted")
              << ", E " << (j["exact_E"].get<bool>() ? "exact" : "drifted") << "\n";
  }
  if (!range.empty()) {
    const Snapshots snaps = read_snapshots(data / "snapshots");
    if (snaps.measures.empty()) throw std::runtime_error("no snapshots recorded");
    const PowerlawFit f = powerlaw_fit(snaps.measures.back(), range[0], range[1], a.bins);
    j["powerlaw"] = {{"slope", f.slope}, {"stderr", f.stderr_}, {"bins_used", f.bins_used},
                     {"exploratory", true}};
    std::cout << "power-law slope (exploratory) " << format_double(f.slope) << " +- "
              << format_double(f.stderr_) << " over " << f.bins_used << " bins\n";
  }
  fs::create_directories(out);
  write_json(out / "report.json", j);
  write_json(out / "manifest.json", manifest("report", a.reg));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavekin: particle and kinetic-equation experiments for four-wave collisions"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.set_version_flag("--version", WAVEKIN_VERSION);

  SimulateArgs sim;
  SolveArgs sol;
  CompareArgs cmp;
  ValidateArgs val;
  PicardArgs pic;
  ReportArgs rep;
  auto* s_sim = app.add_subcommand("simulate", "Run the n-particle process");
  auto* s_sol = app.add_subcommand("solve", "Time-march the truncated kinetic equation");
  auto* s_cmp = app.add_subcommand("compare", "Mean-field convergence of ensembles against a solve");
  auto* s_val = app.add_subcommand("validate", "Check kernel symmetry, homogeneity and sub-multiplicativity");
  auto* s_pic = app.add_subcommand("picard", "Picard iterates and their a-priori bound");
  auto* s_rep = app.add_subcommand("report", "Conservation and spectral summary of a run");
  setup_simulate(s_sim, sim);
  setup_solve(s_sol, sol);
  setup_compare(s_cmp, cmp);
  setup_validate(s_val, val);
  setup_picard(s_pic, pic);
  setup_report(s_rep, rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (s_sim->parsed()) return run_simulate(sim);
    if (s_sol->parsed()) return run_solve(sol);
    if (s_cmp->parsed()) return run_compare(cmp);
    if (s_val->parsed()) return run_validate(val);
    if (s_pic->parsed()) return run_picard(pic);
    if (s_rep->parsed()) return run_report(rep);
  } catch (const SubmultiplicativityError& e) {
    std::cerr << "wavekin: sub-multiplicativity violated: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "wavekin: " << e.what() << "\n";
    return kRuntime;
  }
  return kConfig;
}
