#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <thread>

#include "rms/backends.hpp"
#include "rms/evolution.hpp"
#include "rms/metrics.hpp"
#include "rms/parallel.hpp"
#include "rms/pipeline.hpp"
#include "rms/remote.hpp"
#include "rms/synth.hpp"
#include "rms/world.hpp"

namespace rms::cli {
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Settings: flags win over the config file, which wins over defaults.

class Settings {
 public:
  void load(const std::optional<std::string>& path) {
    if (!path) return;
    if (!fs::exists(*path)) throw ConfigError("config: " + *path + " does not exist");
    try {
      std::ifstream in(*path);
      cfg_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + *path + ": " + e.what());
    }
    if (!cfg_.is_object()) throw ConfigError("config: top level must be an object");
  }

  template <class T>
  T get(const std::optional<T>& flag, const char* key, T fallback) const {
    if (flag) return *flag;
    if (auto it = cfg_.find(key); it != cfg_.end()) {
      try {
        return it->get<T>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
      }
    }
    return fallback;
  }

  bool flag(const CLI::Option* opt, bool value, const char* key, bool fallback) const {
    if (opt->count() > 0) return value;
    return get<bool>(std::nullopt, key, fallback);
  }

  const json* find(const char* key) const {
    auto it = cfg_.find(key);
    return it == cfg_.end() ? nullptr : &*it;
  }

 private:
  json cfg_ = json::object();
};

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> world;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  bool strict = false;
  CLI::Option* strict_opt = nullptr;
  Settings settings;

  void add(CLI::App* app, bool with_world = true) {
    app->add_option("--config", config, "JSON config file; flags override its keys");
    app->add_option("--seed", seed, "Random seed");
    if (with_world) app->add_option("--world", world, "World directory");
    app->add_option("--out", out, "Output directory");
    app->add_option("--workers", workers, "Worker threads (default: logical cores)");
    strict_opt = app->add_flag("--strict-schema", strict, "Reject unknown fields in input records");
  }

  void finish() { settings.load(config); }

  std::uint64_t seed_or(std::uint64_t d) const { return settings.get(seed, "seed", d); }
  std::size_t worker_count() const {
    const auto w = settings.get(workers, "workers", default_workers());
    if (w == 0) throw ConfigError("workers: must be at least 1");
    return w;
  }
  bool strict_schema() const { return settings.flag(strict_opt, strict, "strict_schema", false); }
  DecodeOptions decode() const { return {strict_schema()}; }

  fs::path world_dir() const {
    const auto w = settings.get(world, "world", std::string());
    if (w.empty()) throw ConfigError("world: --world is required");
    if (!fs::is_directory(w)) throw ConfigError("world: " + w + " is not a directory");
    return w;
  }
  World load_world() const { return import_world(world_dir(), decode()); }

  fs::path out_dir(const std::string& fallback = {}) const {
    const auto o = settings.get(out, "out", fallback);
    if (o.empty()) throw ConfigError("out: --out is required");
    return o;
  }
};

fs::path existing_file(const std::string& value, const char* field) {
  if (value.empty()) throw ConfigError(std::string(field) + ": path is required");
  if (!fs::is_regular_file(value)) throw ConfigError(std::string(field) + ": " + value + " not found");
  return value;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::array<double, 4> parse_tier_weights(const std::vector<std::string>& items) {
  std::array<double, 4> w{0, 0, 0, 0};
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("tier-weights: expected k=v, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("tier-weights: bad number in '" + item + "'");
    }
    std::optional<DifficultyTier> tier = enum_from_string<DifficultyTier>(key);
    if (!tier) {
      if (key == "easy") tier = DifficultyTier::easy_negative;
      else if (key == "moderate") tier = DifficultyTier::moderate_negative;
      else if (key == "hard") tier = DifficultyTier::hard_negative;
    }
    if (!tier) throw ConfigError("tier-weights: unknown tier '" + key + "'");
    w[static_cast<std::size_t>(*tier)] = v;
  }
  return w;
}

std::array<double, 4> tier_weights_from(const json& j) {
  if (!j.is_object()) throw ConfigError("tier_weights: expected an object");
  std::vector<std::string> items;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ConfigError("tier_weights." + k + ": expected a number");
    items.push_back(k + "=" + std::to_string(v.get<double>()));
  }
  return parse_tier_weights(items);
}

AgentErrorProfile profile_from(const Settings& s, AgentErrorProfile p) {
  if (const json* j = s.find("agent_profile")) {
    json wrapped = {{"agent_profile", *j}};
    p = evolution_config_from_json(wrapped).agent_profile;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Backends

struct BackendOptions {
  std::optional<std::string> kind;
  std::optional<std::string> endpoint;
  std::optional<double> ds_noise;
  std::optional<double> gp_noise;
  bool eok = true;
  CLI::Option* eok_opt = nullptr;

  void add(CLI::App* app, bool with_backend = true) {
    if (with_backend) {
      app->add_option("--backend", kind, "oracle or remote")
          ->check(CLI::IsMember({"oracle", "remote"}));
      app->add_option("--endpoint", endpoint, "Remote base URL (default $RMS_BACKEND_URL)");
    }
    app->add_option("--ds-noise", ds_noise, "Oracle DS-RM flip rate");
    app->add_option("--gp-noise", gp_noise, "Oracle GP-RM flip rate");
    eok_opt = app->add_flag("--eok,!--no-eok", eok, "Apply EOK prerequisite checks");
  }
};

struct BackendSet {
  std::string kind;
  std::shared_ptr<RemoteClient> client;
  std::unique_ptr<DsBackend> ds;
  std::unique_ptr<GpBackend> gp;
  bool use_eok = true;
};

double unit_rate(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(field) + ": must be in [0, 1]");
  return v;
}

BackendSet make_backends(const World& world, const BackendOptions& o, const Settings& s,
                         std::uint64_t seed, bool eok_default, double ds_noise_default) {
  BackendSet b;
  b.kind = s.get(o.kind, "backend", std::string("oracle"));
  b.use_eok = s.flag(o.eok_opt, o.eok, "eok", eok_default);
  if (b.kind == "remote") {
    auto endpoint = s.get(o.endpoint, "endpoint", std::string());
    auto cfg = remote_config_from_env(endpoint.empty() ? std::nullopt : std::optional(endpoint));
    b.client = std::make_shared<RemoteClient>(cfg);
    b.ds = std::make_unique<RemoteDsBackend>(b.client);
    b.gp = std::make_unique<RemoteGpBackend>(b.client);
  } else if (b.kind == "oracle") {
    OracleDsConfig ds;
    ds.use_eok = b.use_eok;
    ds.noise.base_rate = unit_rate(s.get(o.ds_noise, "ds_noise", ds_noise_default), "ds_noise");
    ds.seed = seed;
    b.ds = std::make_unique<OracleDsBackend>(world, ds);
    OracleGpConfig gp;
    gp.use_eok = b.use_eok;
    gp.noise_rate = unit_rate(s.get(o.gp_noise, "gp_noise", 0.0), "gp_noise");
    gp.seed = seed;
    b.gp = std::make_unique<OracleGpBackend>(world, gp);
  } else {
    throw ConfigError("backend: expected oracle or remote, got '" + b.kind + "'");
  }
  return b;
}

// ---------------------------------------------------------------------------
// Commands

struct GenworldArgs {
  Common common;
  std::optional<int> apps, tasks_per_app, steps_min, steps_max, elements_min, elements_max;
  std::optional<double> ood;
};

int cmd_genworld(GenworldArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  WorldSpec spec;
  if (const json* j = s.find("world_spec")) spec = world_spec_from_json(*j, true);
  spec.seed = a.common.seed_or(spec.seed);
  spec.n_apps = s.get(a.apps, "apps", spec.n_apps);
  spec.n_tasks_per_app = s.get(a.tasks_per_app, "tasks_per_app", spec.n_tasks_per_app);
  spec.ood_app_fraction = s.get(a.ood, "ood", spec.ood_app_fraction);
  spec.steps_distribution.min = s.get(a.steps_min, "steps_min", spec.steps_distribution.min);
  spec.steps_distribution.max = s.get(a.steps_max, "steps_max", spec.steps_distribution.max);
  spec.elements_per_screen.min = s.get(a.elements_min, "elements_min", spec.elements_per_screen.min);
  spec.elements_per_screen.max = s.get(a.elements_max, "elements_max", spec.elements_per_screen.max);
  check_spec(spec);
  const fs::path dir = a.common.out_dir();

  const World world = generate_world(spec);
  if (auto bad = validate(world); !bad.empty()) {
    throw DataError("generated world failed validation: " + bad.front() + " (" +
                    std::to_string(bad.size()) + " violations)");
  }
  export_world(world, dir);
  std::size_t steps = 0;
  for (const auto& t : world.trajectories) steps += t.size();
  out << "world: " << world.apps.size() << " apps (" << ood_app_count(spec) << " OOD), "
      << world.tasks.size() << " tasks, " << steps << " steps -> " << dir.string() << "\n";
  return kExitOk;
}

struct SynthArgs {
  Common common;
  std::optional<std::size_t> total;
  std::optional<std::size_t> candidates;
  std::vector<std::string> tier_weights;
  std::optional<std::string> catalog;
  bool eok = true;
  CLI::Option* eok_opt = nullptr;
};

int cmd_synth(SynthArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  SynthConfig cfg;
  cfg.seed = a.common.seed_or(0);
  cfg.total_samples = s.get(a.total, "total", cfg.total_samples);
  cfg.candidates_per_step = s.get(a.candidates, "candidates_per_step", cfg.candidates_per_step);
  cfg.workers = a.common.worker_count();
  cfg.use_eok = s.flag(a.eok_opt, a.eok, "eok", true);
  if (!a.tier_weights.empty()) {
    cfg.tier_weights = parse_tier_weights(a.tier_weights);
  } else if (const json* j = s.find("tier_weights")) {
    cfg.tier_weights = tier_weights_from(*j);
  }
  check_synth_config(cfg);
  const World world = a.common.load_world();
  const fs::path dir = a.common.out_dir();

  InstructionCatalog catalog = InstructionCatalog::from_world(world);
  if (auto path = s.get(a.catalog, "catalog", std::string()); !path.empty()) {
    catalog = InstructionCatalog::from_json(read_json_file(existing_file(path, "catalog")), world);
  }
  if (auto bad = validate(catalog, world); !bad.empty()) {
    throw ConfigError("catalog: " + bad.front());
  }

  const Dataset ds = synthesize_dataset(world, catalog, cfg);
  export_dataset(ds, dir);
  const auto& m = ds.manifest;
  out << "samples " << m.total << " (";
  bool first = true;
  for (const auto& [tier, n] : m.per_tier) {
    out << (first ? "" : ", ") << tier << " " << n;
    first = false;
  }
  char frac[32];
  std::snprintf(frac, sizeof frac, "%.4f", m.positive_fraction);
  out << "); positive_fraction " << frac << "; train " << m.train_samples << " -> "
      << dir.string() << "\n";
  return kExitOk;
}

struct VerifyArgs {
  Common common;
  std::optional<std::string> dataset;
  bool eok = true;
  CLI::Option* eok_opt = nullptr;
};

int cmd_verify(VerifyArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  const fs::path path = existing_file(s.get(a.dataset, "dataset", std::string()), "dataset");
  const bool use_eok = s.flag(a.eok_opt, a.eok, "eok", true);
  const World world = a.common.load_world();
  const auto samples = read_records<RewardSample>(path, a.common.decode());

  std::map<std::string, std::size_t> by_axis;
  std::size_t agree = 0;
  json mismatches = json::array();
  for (const auto& sample : samples) {
    const StepRef ref = world.lookup(sample.context.instruction.id, sample.context.step_index);
    const auto r = verify(sample.context, ref.ground_truth(), sample.candidate,
                          use_eok ? ref.eok : nullptr);
    ++by_axis[std::string(to_string(r.failure_or_none()))];
    const bool ok = r.passed == sample.label &&
                    r.failure_or_none() == sample.failure_axis.value_or(FailureAxis::none);
    if (ok) {
      ++agree;
    } else if (mismatches.size() < 20) {
      mismatches.push_back({{"id", sample.id},
                            {"label", sample.label ? 1 : 0},
                            {"verified_axis", to_string(r.failure_or_none())}});
    }
  }
  const std::size_t disagree = samples.size() - agree;
  out << "verified " << samples.size() << " samples: " << agree << " agree, " << disagree
      << " disagree\n";
  for (const auto& [axis, n] : by_axis) out << "  " << axis << " " << n << "\n";
  if (a.common.settings.get(a.common.out, "out", std::string()) != "") {
    const fs::path dir = a.common.out_dir();
    ensure_dir(dir);
    write_json_file(dir / "verify_report.json", {{"samples", samples.size()},
                                                 {"agree", agree},
                                                 {"disagree", disagree},
                                                 {"by_axis", by_axis},
                                                 {"mismatches", mismatches}});
  }
  return disagree == 0 ? kExitOk : kExitFailure;
}

struct EvalArgs {
  Common common;
  BackendOptions backend;
  std::optional<std::string> dataset;
};

int cmd_eval_rm(EvalArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  const fs::path path = existing_file(s.get(a.dataset, "dataset", std::string()), "dataset");
  const World world = a.common.load_world();
  const std::size_t workers = a.common.worker_count();
  const BackendSet b = make_backends(world, a.backend, s, a.common.seed_or(0), true, 0.0);
  const auto samples = read_records<RewardSample>(path, a.common.decode());

  std::unique_ptr<bool[]> decisions(new bool[samples.size()]);
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    decisions[i] = b.ds->ds_evaluate(DsInput{samples[i].context, samples[i].candidate}).y_ds;
  });
  const auto rows = discrimination_accuracy("DS-RM (" + b.kind + ")",
                                            std::span<const bool>(decisions.get(), samples.size()),
                                            samples);
  json manifest = nullptr;
  if (const fs::path m = path.parent_path() / "manifest.json"; fs::is_regular_file(m)) {
    manifest = read_json_file(m);
  }
  const json report = aggregate_report(rows, manifest);
  if (s.get(a.common.out, "out", std::string()) != "") {
    const fs::path dir = a.common.out_dir();
    ensure_dir(dir);
    write_json_file(dir / "eval_report.json", report);
    write_text(dir / "eval_report.csv", render_csv(report));
  }
  out << render_text(report);
  if (b.client) out << "requests " << b.client->requests() << ", retries " << b.client->retries() << "\n";
  return kExitOk;
}

struct RefluxArgs {
  Common common;
  BackendOptions backend;
  std::optional<std::size_t> episodes;
};

int cmd_reflux(RefluxArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  const World world = a.common.load_world();
  const std::uint64_t seed = a.common.seed_or(0);
  const std::size_t episodes = s.get(a.episodes, "episodes", std::size_t{200});
  if (episodes == 0) throw ConfigError("episodes: must be at least 1");
  const std::size_t workers = a.common.worker_count();
  const fs::path dir = a.common.out_dir();
  const BackendSet b = make_backends(world, a.backend, s, seed, false, 0.1);
  const AgentErrorProfile profile = profile_from(s, EvolutionConfig{}.agent_profile);
  check_profile(profile);

  const ScriptedAgent agent(profile, seed);
  RefluxStores stores;
  const auto tasks = select_episodes(world, episodes, seed);
  const PipelineOptions options{b.use_eok, {}, true};
  const auto reports =
      run_episodes(agent, Backends{*b.ds, *b.gp}, world, tasks, stores, 0, options, workers);
  ensure_dir(dir);
  stores.export_to(dir);

  std::vector<StepResult> raw, endorsed;
  std::vector<MatchCase> cases;
  for (const auto& ep : reports) {
    const Trajectory& t = world.trajectories[world.task_index(ep.task_id)];
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
      const auto& o = ep.steps[i];
      raw.push_back({ep.split, o.pred_correct.value_or(false)});
      endorsed.push_back({ep.split, o.star_correct.value_or(false)});
      const auto& gt = t.steps[i].ground_truth;
      cases.push_back({ep.split, o.a_pred, gt.a_gt, &t.steps[i].screen, gt.valid_regions});
    }
  }
  std::vector<MetricRow> rows = step_sr_rows("Agent", raw);
  for (auto& r : step_sr_rows("Endorsed", endorsed)) rows.push_back(std::move(r));
  for (auto& r : match_rows("Agent", cases)) rows.push_back(std::move(r));

  json report = aggregate_report(rows);
  const RunSummary summary = summarize(std::span<const EpisodeReport>(reports));
  report["summary"] = encode(summary);
  report["summary"]["agent_training_set"] = stores.agent_size();
  report["summary"]["rms_training_set"] = stores.rms_size();
  json eps = json::array();
  for (const auto& r : reports) eps.push_back(encode(r));
  report["episodes"] = std::move(eps);
  write_json_file(dir / "report.json", report);

  out << "episodes " << summary.episodes << ", steps " << summary.steps << ", agent set "
      << stores.agent_size() << ", rms set " << stores.rms_size() << ", unresolved "
      << summary.unresolved << "\n";
  out << render_text(report);
  return kExitOk;
}

struct EvolveArgs {
  Common common;
  std::optional<int> rounds;
  std::optional<std::size_t> episodes;
  std::optional<double> ds_noise, gp_noise, reduction;
  bool fresh = false;
  CLI::Option* fresh_opt = nullptr;
  bool eok = false;
  CLI::Option* eok_opt = nullptr;
};

int cmd_evolve(EvolveArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  EvolutionConfig cfg;
  cfg.seed = a.common.seed_or(0);
  cfg.rounds = s.get(a.rounds, "rounds", cfg.rounds);
  cfg.episodes_per_round = s.get(a.episodes, "episodes", cfg.episodes_per_round);
  cfg.ds_noise = s.get(a.ds_noise, "ds_noise", cfg.ds_noise);
  cfg.gp_noise = s.get(a.gp_noise, "gp_noise", cfg.gp_noise);
  cfg.reduction_factor = s.get(a.reduction, "reduction_factor", cfg.reduction_factor);
  cfg.revisit = !s.flag(a.fresh_opt, a.fresh, "fresh", false);
  cfg.use_eok = s.flag(a.eok_opt, a.eok, "eok", false);
  cfg.agent_profile = profile_from(s, cfg.agent_profile);
  cfg.workers = a.common.worker_count();
  check_evolution_config(cfg);
  const fs::path dir = a.common.out_dir(".");

  World world;
  if (!s.get(a.common.world, "world", std::string()).empty()) {
    world = a.common.load_world();
  } else {
    WorldSpec spec;
    spec.seed = cfg.seed;
    world = generate_world(spec);
  }
  const auto result = simulate_evolution(world, cfg);
  export_evolution(dir, cfg, result.rounds);
  out << render_text(evolution_report(cfg, result.rounds));
  return kExitOk;
}

struct ReportArgs {
  Common common;
  std::optional<std::string> in;
};

int cmd_report(ReportArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  const std::string in = s.get(a.in, "in", std::string());
  if (in.empty()) throw ConfigError("in: a report directory is required");
  if (!fs::is_directory(in)) throw ConfigError("in: " + in + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MetricRow> rows;
  json manifest = nullptr;
  for (const auto& f : files) {
    const json doc = read_json_file(f);
    if (f.filename() == "manifest.json") {
      manifest = doc;
      continue;
    }
    for (auto& r : report_rows(doc)) rows.push_back(std::move(r));
  }
  rows = sorted_rows(std::move(rows));
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const json report = aggregate_report(std::move(rows), manifest);
  if (s.get(a.common.out, "out", std::string()) != "") {
    const fs::path dir = a.common.out_dir();
    ensure_dir(dir);
    write_json_file(dir / "report.json", report);
    write_text(dir / "report.csv", render_csv(report));
  }
  out << render_text(report);
  return kExitOk;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  Common common;
  BackendOptions backend;
  std::string host = "127.0.0.1";
  int port = 0;
  std::optional<std::string> token;
  std::size_t fail_first = 0;
  std::size_t max_requests = 0;
  std::optional<std::string> port_file;
};

int cmd_serve(ServeArgs& a, std::ostream& out) {
  a.common.finish();
  const Settings& s = a.common.settings;
  const World world = a.common.load_world();
  const BackendSet b = make_backends(world, a.backend, s, a.common.seed_or(0), true, 0.0);
  if (b.kind != "oracle") throw ConfigError("backend: serve-mock-rm serves the oracle backend only");

  MockServerConfig cfg;
  cfg.host = a.host;
  cfg.port = a.port;
  if (a.token) {
    cfg.token = *a.token;
  } else if (const char* env = std::getenv("RMS_BACKEND_TOKEN")) {
    cfg.token = env;
  }
  cfg.fail_first = a.fail_first;
  cfg.decode = a.common.decode();
  cfg.log = &out;

  MockRmServer server(*b.ds, *b.gp, cfg);
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  out << "listening on " << server.url() << std::endl;
  if (a.port_file) write_text(*a.port_file, std::to_string(server.port()) + "\n");
  while (!g_stop && (a.max_requests == 0 || server.requests() < a.max_requests)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  server.stop();
  out << "served " << server.requests() << " requests" << std::endl;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rms: rule verification, reward-data synthesis, hierarchical reward evaluation, "
               "reflux and self-evolution over synthetic app worlds"};
  app.name("rms");
  app.require_subcommand(1);

  GenworldArgs gen;
  auto* g = app.add_subcommand("genworld", "Generate a synthetic app world");
  gen.common.add(g, false);
  g->add_option("--apps", gen.apps, "Number of apps");
  g->add_option("--tasks-per-app", gen.tasks_per_app, "Tasks per app");
  g->add_option("--ood", gen.ood, "Fraction of apps held out as OOD");
  g->add_option("--steps-min", gen.steps_min, "Minimum trajectory length");
  g->add_option("--steps-max", gen.steps_max, "Maximum trajectory length");
  g->add_option("--elements-min", gen.elements_min, "Minimum interactive elements per screen");
  g->add_option("--elements-max", gen.elements_max, "Maximum interactive elements per screen");

  SynthArgs syn;
  auto* sy = app.add_subcommand("synth", "Synthesize the tiered reward dataset");
  syn.common.add(sy);
  sy->add_option("--total", syn.total, "Dataset size");
  sy->add_option("--candidates-per-step", syn.candidates, "Agent draws per ground-truth step");
  sy->add_option("--tier-weights", syn.tier_weights, "positive=.. easy=.. moderate=.. hard=..")
      ->expected(1, -1);
  sy->add_option("--catalog", syn.catalog, "Instruction catalog JSON");
  syn.eok_opt = sy->add_flag("--eok,!--no-eok", syn.eok, "Label with EOK prerequisites");

  VerifyArgs ver;
  auto* ve = app.add_subcommand("verify", "Re-verify dataset labels against the world's rules");
  ver.common.add(ve);
  ve->add_option("--dataset", ver.dataset, "Dataset JSONL");
  ver.eok_opt = ve->add_flag("--eok,!--no-eok", ver.eok, "Apply EOK prerequisite checks");

  EvalArgs ev;
  auto* er = app.add_subcommand("eval-rm", "Discrimination accuracy of a DS-RM backend");
  ev.common.add(er);
  ev.backend.add(er);
  er->add_option("--dataset", ev.dataset, "Dataset JSONL");

  RefluxArgs rf;
  auto* rx = app.add_subcommand("reflux", "Run episodes through the pipeline and export reflux sets");
  rf.common.add(rx);
  rf.backend.add(rx);
  rx->add_option("--episodes", rf.episodes, "Episode count");

  EvolveArgs evo;
  auto* eo = app.add_subcommand("evolve", "Multi-round self-evolution simulation");
  evo.common.add(eo);
  eo->add_option("--rounds", evo.rounds, "Rounds");
  eo->add_option("--episodes", evo.episodes, "Episodes per round");
  eo->add_option("--ds-noise", evo.ds_noise, "Initial DS-RM noise rate");
  eo->add_option("--gp-noise", evo.gp_noise, "GP-RM noise rate");
  eo->add_option("--reduction", evo.reduction, "Noise reduction factor per disagreement pattern");
  evo.fresh_opt = eo->add_flag("--fresh", evo.fresh, "Draw fresh episodes every round");
  evo.eok_opt = eo->add_flag("--eok,!--no-eok", evo.eok, "Apply EOK prerequisite checks");

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "Render report tables from a run directory");
  rep.common.add(rp, false);
  rp->add_option("in,--in", rep.in, "Directory holding *.json reports");

  ServeArgs srv;
  auto* sv = app.add_subcommand("serve-mock-rm", "Serve oracle DS/GP backends over HTTP");
  srv.common.add(sv);
  srv.backend.add(sv, false);
  sv->add_option("--host", srv.host, "Bind address")->capture_default_str();
  sv->add_option("--port", srv.port, "Port (0 picks a free one)")->capture_default_str();
  sv->add_option("--token", srv.token, "Required bearer token (default $RMS_BACKEND_TOKEN)");
  sv->add_option("--fail-first", srv.fail_first, "Answer the first N requests with 503");
  sv->add_option("--max-requests", srv.max_requests, "Exit after N requests (0: run until signalled)");
  sv->add_option("--port-file", srv.port_file, "Write the bound port here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*g) return cmd_genworld(gen, out);
    if (*sy) return cmd_synth(syn, out);
    if (*ve) return cmd_verify(ver, out);
    if (*er) return cmd_eval_rm(ev, out);
    if (*rx) return cmd_reflux(rf, out);
    if (*eo) return cmd_evolve(evo, out);
    if (*rp) return cmd_report(rep, out);
    if (*sv) return cmd_serve(srv, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace rms::cli
