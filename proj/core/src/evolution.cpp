#include "rms/evolution.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rms/parallel.hpp"
#include "rms/rng.hpp"

namespace rms {

std::string context_fingerprint(const StepContext& context) {
  return context.instruction.id + "|" + std::to_string(context.step_index) + "|" +
         context.screen.screen_id;
}

Action TablePolicy::propose(const StepContext& context, const StepGroundTruth& gt) const {
  if (auto it = table_.find(context_fingerprint(context)); it != table_.end()) return it->second;
  return base_.propose(context, gt);
}

LearnerState apply_agent_reflux(LearnerState state, std::span<const AgentRecord> records) {
  for (const auto& r : records) {
    if (r.split != Split::idd || r.unresolved) continue;
    state.policy.insert_or_assign(context_fingerprint(r.context), r.a_star);
  }
  return state;
}

LearnerState apply_rms_reflux(LearnerState state, std::span<const RmsRecord> records,
                              double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw ConfigError("reduction_factor: must be in (0, 1], got " + std::to_string(factor));
  }
  std::set<std::string> patterns;
  for (const auto& r : records) {
    if (r.split == Split::idd) patterns.insert(r.pattern);
  }
  for (const auto& p : patterns) state.ds_noise.reduce(p, factor);
  return state;
}

// ---------------------------------------------------------------------------
// Metrics

void SplitMetric::add(Split s, bool correct) {
  if (s == Split::idd) {
    idd_correct += correct ? 1 : 0;
    ++idd_total;
  } else {
    ood_correct += correct ? 1 : 0;
    ++ood_total;
  }
}

namespace {

double pct(std::size_t c, std::size_t n) {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(c) / static_cast<double>(n);
}

}  // namespace

double SplitMetric::all() const { return pct(idd_correct + ood_correct, n()); }
double SplitMetric::idd() const { return pct(idd_correct, idd_total); }
double SplitMetric::ood() const { return pct(ood_correct, ood_total); }

// ---------------------------------------------------------------------------
// Configuration

void check_evolution_config(const EvolutionConfig& c) {
  if (c.rounds < 1) throw ConfigError("rounds: must be at least 1");
  if (c.episodes_per_round < 1) throw ConfigError("episodes: must be at least 1");
  check_profile(c.agent_profile);
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + ": must be in [0, 1]");
  };
  unit(c.ds_noise, "ds_noise");
  unit(c.gp_noise, "gp_noise");
  if (!(c.reduction_factor > 0.0 && c.reduction_factor <= 1.0)) {
    throw ConfigError("reduction_factor: must be in (0, 1]");
  }
}

LearnerState initial_state(const EvolutionConfig& config) {
  LearnerState s;
  s.base_profile = config.agent_profile;
  s.agent_seed = config.seed;
  s.ds_noise.base_rate = config.ds_noise;
  return s;
}

json encode(const EvolutionConfig& c) {
  return {{"seed", c.seed},
          {"rounds", c.rounds},
          {"episodes_per_round", c.episodes_per_round},
          {"revisit", c.revisit},
          {"agent_profile",
           {{"p_type_error", c.agent_profile.p_type_error},
            {"p_grounding_offset", c.agent_profile.p_grounding_offset},
            {"p_intent_error", c.agent_profile.p_intent_error},
            {"p_semantic_error", c.agent_profile.p_semantic_error},
            {"grounding_offset_scale", c.agent_profile.grounding_offset_scale}}},
          {"ds_noise", c.ds_noise},
          {"gp_noise", c.gp_noise},
          {"reduction_factor", c.reduction_factor},
          {"use_eok", c.use_eok}};
}

EvolutionConfig evolution_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("evolution config: expected an object");
  EvolutionConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "rounds") c.rounds = v.get<int>();
      else if (key == "episodes_per_round" || key == "episodes") c.episodes_per_round = v.get<std::size_t>();
      else if (key == "revisit") c.revisit = v.get<bool>();
      else if (key == "ds_noise") c.ds_noise = v.get<double>();
      else if (key == "gp_noise") c.gp_noise = v.get<double>();
      else if (key == "reduction_factor") c.reduction_factor = v.get<double>();
      else if (key == "use_eok") c.use_eok = v.get<bool>();
      else if (key == "workers") c.workers = v.get<std::size_t>();
      else if (key == "agent_profile") {
        auto& p = c.agent_profile;
        for (const auto& [k, x] : v.items()) {
          if (k == "p_type_error") p.p_type_error = x.get<double>();
          else if (k == "p_grounding_offset") p.p_grounding_offset = x.get<double>();
          else if (k == "p_intent_error") p.p_intent_error = x.get<double>();
          else if (k == "p_semantic_error") p.p_semantic_error = x.get<double>();
          else if (k == "grounding_offset_scale") p.grounding_offset_scale = x.get<double>();
          else throw ConfigError("agent_profile." + k + ": unknown field");
        }
      } else {
        throw ConfigError(key + ": unknown field");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("evolution config: ") + e.what());
  }
  check_evolution_config(c);
  return c;
}

// ---------------------------------------------------------------------------
// Simulation

std::vector<DiscriminationItem> discrimination_benchmark(const World& world,
                                                         std::span<const std::size_t> tasks,
                                                         const LearnerState& state, bool use_eok) {
  std::set<std::size_t> unique(tasks.begin(), tasks.end());
  const ScriptedAgent base(state.base_profile, state.agent_seed);
  std::vector<DiscriminationItem> items;
  for (std::size_t t : unique) {
    const Trajectory& traj = world.trajectories.at(t);
    const Split split = world.split_of_app(traj.app);
    const EokGraph* eok = use_eok ? &world.eok.at(t) : nullptr;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const StepContext ctx = gt_context(traj, i);
      const auto& gt = traj.steps[i].ground_truth;
      items.push_back({DsInput{ctx, gt.a_gt}, true, split});
      const Action proposal = base.propose(ctx, gt);
      items.push_back({DsInput{ctx, proposal}, verify(ctx, gt, proposal, eok).passed, split});
    }
  }
  return items;
}

SplitMetric ds_accuracy(const DsBackend& ds, std::span<const DiscriminationItem> items,
                        std::size_t workers) {
  const auto hits = parallel_map<char>(items.size(), workers, [&](std::size_t i) {
    return static_cast<char>(ds.ds_evaluate(items[i].input).y_ds == items[i].label);
  });
  SplitMetric m;
  for (std::size_t i = 0; i < items.size(); ++i) m.add(items[i].split, hits[i] != 0);
  return m;
}

EvolutionResult simulate_evolution(const World& world, const EvolutionConfig& config,
                                   const GpBackend* gp) {
  check_evolution_config(config);
  LearnerState state = initial_state(config);
  const OracleGpBackend oracle_gp(world, {config.use_eok, config.gp_noise, config.seed, {}});
  const GpBackend& gp_rm = gp != nullptr ? *gp : oracle_gp;

  const auto base_tasks = select_episodes(world, config.episodes_per_round, config.seed);
  const auto bench = discrimination_benchmark(world, base_tasks, state, config.use_eok);
  const PipelineOptions options{config.use_eok, {}, true};

  EvolutionResult result;
  for (int r = 0; r < config.rounds; ++r) {
    const auto tasks =
        config.revisit
            ? base_tasks
            : select_episodes(world, config.episodes_per_round,
                              KeyHasher(config.seed).add("round").add(static_cast<std::uint64_t>(r)).value());
    OracleDsConfig ds_cfg;
    ds_cfg.use_eok = config.use_eok;
    ds_cfg.noise = state.ds_noise;
    ds_cfg.seed = config.seed;
    const OracleDsBackend ds(world, ds_cfg);
    const TablePolicy agent(state);
    RefluxStores stores;
    const auto reports =
        run_episodes(agent, Backends{ds, gp_rm}, world, tasks, stores, r, options, config.workers);

    RoundReport rr;
    rr.round = r;
    rr.policy_size = state.policy.size();
    for (const auto& ep : reports) {
      for (const auto& o : ep.steps) {
        rr.agent_sr.add(ep.split, o.pred_correct.value_or(false));
        rr.endorsed_sr.add(ep.split, o.star_correct.value_or(false));
      }
      rr.disagreements += ep.disagreements();
      rr.unresolved += ep.unresolved();
    }
    rr.ds_acc = ds_accuracy(ds, bench, config.workers);
    const auto agent_set = stores.agent_records();
    const auto rms_set = stores.rms_records();
    rr.agent_reflux = agent_set.size();
    rr.rms_reflux = rms_set.size();
    result.rounds.push_back(rr);

    state = apply_agent_reflux(std::move(state), agent_set);
    state = apply_rms_reflux(std::move(state), rms_set, config.reduction_factor);
  }
  result.final_state = std::move(state);
  return result;
}

// ---------------------------------------------------------------------------
// Output

namespace {

json encode_metric(const SplitMetric& m) {
  return {{"ALL", m.all()},
          {"IDD", m.idd()},
          {"OOD", m.ood()},
          {"n", {{"ALL", m.n()}, {"IDD", m.idd_total}, {"OOD", m.ood_total}}},
          {"correct",
           {{"ALL", m.idd_correct + m.ood_correct}, {"IDD", m.idd_correct}, {"OOD", m.ood_correct}}}};
}

}  // namespace

json encode(const RoundReport& r) {
  return {{"round", r.round},
          {"agent", encode_metric(r.agent_sr)},
          {"ds_rm", encode_metric(r.ds_acc)},
          {"endorsed", encode_metric(r.endorsed_sr)},
          {"agent_reflux", r.agent_reflux},
          {"rms_reflux", r.rms_reflux},
          {"disagreements", r.disagreements},
          {"unresolved", r.unresolved},
          {"policy_size", r.policy_size}};
}

std::vector<MetricRow> round_rows(std::span<const RoundReport> rounds) {
  auto counter = [](const SplitMetric& m) {
    return CellCounter{m.idd_correct, m.idd_total, m.ood_correct, m.ood_total};
  };
  std::vector<MetricRow> rows;
  for (const auto& r : rounds) {
    counter(r.agent_sr).emit(rows, "Agent", "StepSR", std::nullopt, r.round);
    counter(r.ds_acc).emit(rows, "DS-RM", "DiscAcc", std::nullopt, r.round);
  }
  return rows;
}

json evolution_report(const EvolutionConfig& config, std::span<const RoundReport> rounds) {
  json out = aggregate_report(round_rows(rounds));
  json table = json::array();
  for (const auto& r : rounds) table.push_back(encode(r));
  out["config"] = encode(config);
  out["rounds"] = std::move(table);
  return out;
}

std::string evolution_csv(std::span<const RoundReport> rounds) {
  std::ostringstream out;
  out << "round,model,split,value,n\n";
  auto emit = [&](int round, const char* model, const SplitMetric& m) {
    const std::pair<const char*, std::pair<double, std::size_t>> cells[] = {
        {"ALL", {m.all(), m.n()}}, {"IDD", {m.idd(), m.idd_total}}, {"OOD", {m.ood(), m.ood_total}}};
    for (const auto& [split, cell] : cells) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", cell.first);
      out << round << ',' << model << ',' << split << ',' << buf << ',' << cell.second << '\n';
    }
  };
  for (const auto& r : rounds) {
    emit(r.round, "Agent", r.agent_sr);
    emit(r.round, "DS-RM", r.ds_acc);
  }
  return out.str();
}

void export_evolution(const std::filesystem::path& dir, const EvolutionConfig& config,
                      std::span<const RoundReport> rounds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_json_file(dir / "evolution_report.json", evolution_report(config, rounds));
  std::ofstream csv(dir / "evolution_report.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw DataError("cannot write " + (dir / "evolution_report.csv").string());
  csv << evolution_csv(rounds);
}

}  // namespace rms
