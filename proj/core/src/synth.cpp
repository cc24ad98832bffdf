#include "rms/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "rms/parallel.hpp"
#include "rms/verifier.hpp"

namespace rms {

// ---------------------------------------------------------------------------
// Catalog

InstructionCatalog InstructionCatalog::from_world(const World& world) {
  InstructionCatalog c;
  std::map<std::string, std::size_t> by_app;
  for (const auto& t : world.tasks) {
    auto [it, inserted] = by_app.emplace(t.app, c.groups.size());
    if (inserted) c.groups.emplace_back();
    c.groups[it->second].push_back(t);
  }
  return c;
}

InstructionCatalog InstructionCatalog::from_json(const json& j, const World& world) {
  if (!j.is_object() || !j.contains("groups") || !j["groups"].is_array()) {
    throw ConfigError("catalog: expected {\"groups\": [[task ids...], ...]}");
  }
  InstructionCatalog c;
  for (std::size_t g = 0; g < j["groups"].size(); ++g) {
    const json& group = j["groups"][g];
    if (!group.is_array()) throw ConfigError("catalog.groups[" + std::to_string(g) + "]: expected an array");
    auto& out = c.groups.emplace_back();
    for (const auto& id : group) {
      if (!id.is_string()) throw ConfigError("catalog.groups[" + std::to_string(g) + "]: expected task ids");
      try {
        out.push_back(world.tasks[world.task_index(id.get<std::string>())]);
      } catch (const DataError& e) {
        throw ConfigError("catalog.groups[" + std::to_string(g) + "]: " + e.what());
      }
    }
  }
  return c;
}

json InstructionCatalog::to_json() const {
  json groups_json = json::array();
  for (const auto& g : groups) {
    json ids = json::array();
    for (const auto& t : g) ids.push_back(t.id);
    groups_json.push_back(std::move(ids));
  }
  return {{"groups", std::move(groups_json)}};
}

const std::vector<TaskInstruction>* InstructionCatalog::group_of(std::string_view task_id) const {
  for (const auto& g : groups) {
    for (const auto& t : g) {
      if (t.id == task_id) return &g;
    }
  }
  return nullptr;
}

Violations validate(const InstructionCatalog& catalog, const World& world) {
  Violations out;
  std::set<std::string> seen;
  for (std::size_t g = 0; g < catalog.groups.size(); ++g) {
    const auto& group = catalog.groups[g];
    const std::string where = "groups[" + std::to_string(g) + "]";
    std::vector<const Trajectory*> trajs;
    for (const auto& t : group) {
      if (!seen.insert(t.id).second) out.push_back(where + ": task '" + t.id + "' listed twice");
      try {
        trajs.push_back(&world.trajectories[world.task_index(t.id)]);
      } catch (const DataError&) {
        out.push_back(where + ": unknown task '" + t.id + "'");
      }
    }
    for (std::size_t a = 0; a < trajs.size(); ++a) {
      for (std::size_t b = a + 1; b < trajs.size(); ++b) {
        bool same = trajs[a]->steps.size() == trajs[b]->steps.size();
        for (std::size_t s = 0; same && s < trajs[a]->steps.size(); ++s) {
          same = trajs[a]->steps[s].ground_truth.a_gt == trajs[b]->steps[s].ground_truth.a_gt;
        }
        if (same) {
          out.push_back(where + ": '" + trajs[a]->task.id + "' and '" + trajs[b]->task.id +
                        "' are operationally identical");
        }
      }
    }
  }
  return out;
}

TaskInstruction substitute_instruction(const TaskInstruction& x, const InstructionCatalog& catalog,
                                       Rng& rng) {
  const auto* group = catalog.group_of(x.id);
  if (group == nullptr) throw NoSubstituteError("task '" + x.id + "' is not in the catalog");
  if (group->size() < 2) throw NoSubstituteError("task '" + x.id + "' has no sibling");
  std::size_t pick = rng.index(group->size() - 1);
  std::size_t self = 0;
  while ((*group)[self].id != x.id) ++self;
  if (pick >= self) ++pick;
  return (*group)[pick];
}

// ---------------------------------------------------------------------------
// Stitching

Trajectory stitch_trajectories(const Trajectory& tau1, const Trajectory& tau2, std::size_t k) {
  if (tau1.task.id == tau2.task.id) throw DataError("stitch: both trajectories share one task");
  if (k < 1 || k >= tau1.size()) {
    throw DataError("stitch: cut " + std::to_string(k) + " outside [1, " +
                    std::to_string(tau1.size()) + ")");
  }
  Trajectory out;
  out.task = tau1.task;
  out.app = tau1.app;
  out.steps.assign(tau1.steps.begin(), tau1.steps.begin() + static_cast<std::ptrdiff_t>(k));
  if (k < tau2.size()) {
    out.steps.insert(out.steps.end(), tau2.steps.begin() + static_cast<std::ptrdiff_t>(k),
                     tau2.steps.end());
  }
  return out;
}

std::vector<std::size_t> divergent_cuts(const Trajectory& tau1, const Trajectory& tau2) {
  std::vector<std::size_t> cuts;
  for (std::size_t k = 1; k < tau1.size() && k < tau2.size(); ++k) {
    const ScreenState& screen = tau1.steps[k].screen;
    if (describe_action(tau1.steps[k].ground_truth.a_gt, screen) !=
        describe_action(tau2.steps[k].ground_truth.a_gt, screen)) {
      cuts.push_back(k);
    }
  }
  return cuts;
}

// ---------------------------------------------------------------------------
// Intention

std::string_view to_string(Intention i) noexcept {
  return i == Intention::correct_intent ? "correct_intent" : "wrong_intent";
}

namespace {

const UiElement* nearest_interactive(const ScreenState& screen, Point p) {
  const UiElement* best = nullptr;
  double best_d = 0.0;
  for (const auto& e : screen.elements) {
    if (!e.interactive) continue;
    const double d = e.box.distance_to(p);
    if (best == nullptr || d < best_d || (d == best_d && e.box.area() < best->box.area())) {
      best = &e;
      best_d = d;
    }
  }
  return best;
}

bool point_intent(Point p, const StepGroundTruth& gt, const ScreenState& screen, double snap) {
  const auto& valid = gt.valid_regions;
  if (const UiElement* n = nearest_interactive(screen, p)) {
    if (std::find(valid.begin(), valid.end(), n->element_id) != valid.end()) return true;
  }
  for (const auto& id : valid) {
    if (const UiElement* e = screen.find(id); e != nullptr && e->box.distance_to(p) <= snap) {
      return true;
    }
  }
  return false;
}

}  // namespace

Intention match_intention(const Action& a_os, const StepGroundTruth& gt, const ScreenState& screen,
                          const IntentionConfig& config) {
  if (a_os.type() != gt.a_gt.type()) return Intention::wrong_intent;
  if (const auto* in = a_os.get_if<act::InputText>()) {
    if (!texts_equivalent(in->text, gt.a_gt.get_if<act::InputText>()->text, config.text)) {
      return Intention::wrong_intent;
    }
  }
  if (const auto* op = a_os.get_if<act::OpenApp>()) {
    return texts_equivalent(op->name, gt.a_gt.get_if<act::OpenApp>()->name, config.text)
               ? Intention::correct_intent
               : Intention::wrong_intent;
  }
  if (const auto* sw = a_os.get_if<act::Swipe>()) {
    if (sw->direction != gt.a_gt.get_if<act::Swipe>()->direction) return Intention::wrong_intent;
  }
  const auto p = a_os.point();
  if (!p) return Intention::correct_intent;
  return point_intent(*p, gt, screen, config.snap_radius) ? Intention::correct_intent
                                                          : Intention::wrong_intent;
}

Action repair_grounding(const Action& a_os, const StepGroundTruth& gt, const ScreenState& screen) {
  const auto p = a_os.point();
  if (!p) throw DataError("repair_grounding: action carries no point");
  const UiElement* best = nullptr;
  double best_d = 0.0;
  for (const auto& id : gt.valid_regions) {
    const UiElement* e = screen.find(id);
    if (e == nullptr) continue;
    const double d = e->box.distance_to(*p);
    if (best == nullptr || d < best_d) {
      best = e;
      best_d = d;
    }
  }
  if (best == nullptr) throw DataError("repair_grounding: no valid region resolves on screen");
  return a_os.with_point(best->box.center());
}

RewardSample classify_os_action(const Action& a_os, const StepContext& context,
                                const StepGroundTruth& gt, const ClassifyOptions& options) {
  RewardSample s;
  s.context = context;
  s.candidate = a_os;
  const VerifierConfig vc{options.intention.text};
  const auto v = verify(context, gt, a_os, options.eok, vc);
  auto positive = [&](const Action& a, SampleSource src) {
    s.candidate = a;
    s.label = true;
    s.tier = DifficultyTier::positive;
    s.source = src;
    s.failure_axis = FailureAxis::none;
    return s;
  };
  if (v.passed) return positive(a_os, SampleSource::rule_verified);

  const auto intent = match_intention(a_os, gt, context.screen, options.intention);
  s.label = false;
  s.failure_axis = v.failure_or_none();
  if (intent == Intention::wrong_intent) {
    s.tier = DifficultyTier::moderate_negative;
    s.source = SampleSource::os_agent_intent_error;
    return s;
  }
  if (a_os.point()) {
    const Action repaired = repair_grounding(a_os, gt, context.screen);
    if (verify(context, gt, repaired, options.eok, vc).passed) {
      return positive(repaired, SampleSource::os_agent_repaired);
    }
  }
  s.tier = DifficultyTier::hard_negative;
  s.source = SampleSource::rule_verified;
  return s;
}

// ---------------------------------------------------------------------------
// Easy negatives

void check_synth_config(const SynthConfig& c) {
  if (c.total_samples == 0) throw ConfigError("total_samples: must be positive");
  (void)tier_counts(c.tier_weights, c.total_samples);
  if (c.candidates_per_step == 0) throw ConfigError("candidates_per_step: must be positive");
  if (!(c.intention.snap_radius >= 0.0)) throw ConfigError("snap_radius: must be non-negative");
  check_profile(c.os_profile);
  check_profile(c.rule_profile);
}

namespace {

Split split_of(const World& world, const StepContext& c) {
  return world.split_of_app(c.instruction.app);
}

std::string step_tag(std::size_t t) { return "t" + std::to_string(t); }

}  // namespace

EasyNegativeResult synthesize_easy_negatives(const World& world, const InstructionCatalog& catalog,
                                             std::size_t budget, std::uint64_t seed,
                                             const SynthConfig& config) {
  if (budget == 0) throw ConfigError("easy-negative budget must be at least 1");
  EasyNegativeResult out;
  Rng rng(KeyHasher(seed).add("easy").value());
  const VerifierConfig vc{config.intention.text};

  std::vector<std::size_t> substitutable;
  for (std::size_t i = 0; i < world.tasks.size(); ++i) {
    const auto* g = catalog.group_of(world.tasks[i].id);
    if (g != nullptr && g->size() >= 2) substitutable.push_back(i);
  }
  const bool can_stitch = world.tasks.size() >= 2;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> seen_pos;

  auto emit = [&](std::string id, StepContext ctx, const StepGroundTruth& gt, const Action& cand,
                  const Action& positive, SampleSource source, const EokGraph* eok,
                  std::string pos_key) {
    const auto v = verify(ctx, gt, cand, eok, vc);
    if (v.passed) {
      ++out.rejected;
      return;
    }
    const Split split = split_of(world, ctx);
    if (seen_pos.insert(pos_key).second && verify(ctx, gt, positive, eok, vc).passed) {
      out.matched_positives.push_back(
          {id + ":pos", ctx, positive, true, DifficultyTier::positive, source, split,
           FailureAxis::none});
    }
    out.negatives.push_back({std::move(id), std::move(ctx), cand, false,
                             DifficultyTier::easy_negative, source, split, v.failure_or_none()});
  };

  auto try_substitution = [&]() {
    const std::size_t xi = substitutable[rng.index(substitutable.size())];
    const auto& x = world.tasks[xi];
    const TaskInstruction xp = substitute_instruction(x, catalog, rng);
    const auto& tx = world.trajectories[xi];
    const auto& txp = world.trajectories[world.task_index(xp.id)];
    const std::size_t max_t = std::min(tx.size(), txp.size());
    const auto t = static_cast<std::size_t>(rng.between(2, static_cast<int>(max_t)));
    std::string id = "sub:" + x.id + ":" + xp.id + ":" + step_tag(t);
    if (!seen.insert(id).second) return;
    const auto& gt = tx.steps[t - 1].ground_truth;
    emit(std::move(id), gt_context(tx, t - 1), gt, txp.steps[t - 1].ground_truth.a_gt, gt.a_gt,
         SampleSource::instruction_substitution, config.use_eok ? &world.eok[xi] : nullptr,
         "sub:" + x.id + ":" + step_tag(t));
  };

  auto try_stitching = [&]() {
    const std::size_t n = world.tasks.size();
    const std::size_t i1 = rng.index(n);
    std::size_t i2 = rng.index(n - 1);
    if (i2 >= i1) ++i2;
    const auto& t1 = world.trajectories[i1];
    const auto& t2 = world.trajectories[i2];
    const auto cuts = divergent_cuts(t1, t2);
    if (cuts.empty()) return;
    const std::size_t k = cuts[rng.index(cuts.size())];
    const Trajectory stitched = stitch_trajectories(t1, t2, k);
    const std::size_t max_t = std::min(t1.size(), stitched.size());
    const auto t = static_cast<std::size_t>(
        rng.between(static_cast<int>(k) + 1, static_cast<int>(max_t)));
    std::string id = "stitch:" + t1.task.id + ":" + t2.task.id + ":k" + std::to_string(k) + ":" +
                     step_tag(t);
    if (!seen.insert(id).second) return;
    std::vector<HistoryEntry> history;
    for (std::size_t j = 0; j + 1 < t; ++j) {
      history.push_back(history_entry(stitched.steps[j].screen, stitched.steps[j].ground_truth.a_gt));
    }
    const auto& gt = t1.steps[t - 1].ground_truth;
    std::string pos_key = id;
    emit(std::move(id), make_context(t1, t - 1, std::move(history)), gt,
         stitched.steps[t - 1].ground_truth.a_gt, gt.a_gt, SampleSource::trajectory_stitching,
         config.use_eok ? &world.eok[i1] : nullptr, std::move(pos_key));
  };

  const std::size_t max_attempts = budget * 40 + 200;
  for (std::size_t attempt = 0; attempt < max_attempts && out.negatives.size() < budget;
       ++attempt) {
    const bool want_sub = out.negatives.size() % 2 == 0;
    if ((want_sub && !substitutable.empty()) || !can_stitch) {
      if (substitutable.empty()) break;
      try_substitution();
    } else {
      try_stitching();
    }
  }
  out.shortfall = budget - out.negatives.size();
  return out;
}

// ---------------------------------------------------------------------------
// Pools

std::array<std::size_t, 4> tier_counts(const std::array<double, 4>& weights, std::size_t total) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ConfigError("tier_weights." + std::string(to_string(static_cast<DifficultyTier>(i))) +
                        ": must be a non-negative number");
    }
    sum += weights[i];
  }
  if (sum <= 0.0) throw ConfigError("tier_weights: at least one weight must be positive");
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[order[r % 4]];
  return counts;
}

namespace {

struct StepSlot {
  std::size_t task;
  std::size_t step;
};

struct StepPools {
  std::vector<RewardSample> os;
  std::vector<RewardSample> rule;
};

std::string dedup_key(const RewardSample& s) {
  std::string key = s.context.instruction.id + "|" + std::to_string(s.context.step_index) + "|";
  for (const auto& h : s.context.history) key += h.screen_id + ">" + h.target + ";";
  key += "|" + dump_canonical(encode(s.candidate));
  return key;
}

}  // namespace

SamplePools synthesize_pools(const World& world, const InstructionCatalog& catalog,
                             const SynthConfig& config) {
  check_synth_config(config);
  const auto counts = tier_counts(config.tier_weights, config.total_samples);
  SamplePools pools;

  std::vector<StepSlot> slots;
  for (std::size_t i = 0; i < world.trajectories.size(); ++i) {
    for (std::size_t j = 0; j < world.trajectories[i].size(); ++j) slots.push_back({i, j});
  }
  const VerifierConfig vc{config.intention.text};
  auto per_step = parallel_map<StepPools>(slots.size(), config.workers, [&](std::size_t n) {
    const auto [ti, sj] = slots[n];
    const auto& traj = world.trajectories[ti];
    const auto& gt = traj.steps[sj].ground_truth;
    const EokGraph* eok = config.use_eok ? &world.eok[ti] : nullptr;
    const StepContext ctx = gt_context(traj, sj);
    const Split split = world.split_of_app(traj.app);
    const std::string where = traj.task.id + ":" + step_tag(sj + 1) + ":d";
    StepPools out;
    for (std::size_t d = 0; d < config.candidates_per_step; ++d) {
      Rng os_rng(KeyHasher(config.seed).add("os").add(traj.task.id).add(sj).add(d).value());
      const Action a_os = scripted_agent_act(config.os_profile, ctx, gt, os_rng);
      RewardSample s = classify_os_action(a_os, ctx, gt, {config.intention, eok});
      s.id = "os:" + where + std::to_string(d);
      s.split = split;
      out.os.push_back(std::move(s));

      Rng rule_rng(KeyHasher(config.seed).add("rule").add(traj.task.id).add(sj).add(d).value());
      const Action a = scripted_agent_act(config.rule_profile, ctx, gt, rule_rng);
      const auto v = verify(ctx, gt, a, eok, vc);
      out.rule.push_back({"rule:" + where + std::to_string(d), ctx, a, v.passed,
                          v.passed ? DifficultyTier::positive : DifficultyTier::hard_negative,
                          SampleSource::rule_verified, split, v.failure_or_none()});
    }
    return out;
  });

  std::unordered_set<std::string> seen;
  auto add = [&](RewardSample s) {
    if (seen.insert(dedup_key(s)).second) pools[s.tier].push_back(std::move(s));
  };
  std::size_t os_n = 0;
  std::size_t rule_n = 0;
  for (auto& p : per_step) {
    os_n += p.os.size();
    rule_n += p.rule.size();
    for (auto& s : p.os) add(std::move(s));
    for (auto& s : p.rule) add(std::move(s));
  }

  const std::size_t easy_needed = counts[static_cast<std::size_t>(DifficultyTier::easy_negative)];
  std::size_t easy_emitted = 0;
  if (easy_needed > 0 || counts[0] > 0) {
    const std::size_t budget = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(easy_needed) * 1.25)) + 16);
    auto easy = synthesize_easy_negatives(world, catalog, budget, config.seed, config);
    pools.easy_rejected = easy.rejected;
    pools.easy_shortfall = easy.shortfall;
    easy_emitted = easy.negatives.size();
    for (auto& s : easy.negatives) add(std::move(s));
    for (auto& s : easy.matched_positives) add(std::move(s));
  }

  for (auto& pool : pools.by_tier) {
    std::sort(pool.begin(), pool.end(),
              [](const RewardSample& a, const RewardSample& b) { return a.id < b.id; });
  }
  pools.provenance = json::array({
      {{"mechanism", "os_agent"}, {"candidates", os_n}, {"profile", "os"}},
      {{"mechanism", "rule_verified"}, {"candidates", rule_n}, {"profile", "rule"}},
      {{"mechanism", "perturbation"},
       {"candidates", easy_emitted},
       {"rejected", pools.easy_rejected},
       {"shortfall", pools.easy_shortfall}},
      {{"mechanism", "world"},
       {"seed", world.spec.seed},
       {"tasks", world.tasks.size()},
       {"steps", slots.size()}},
  });
  return pools;
}

// ---------------------------------------------------------------------------
// Dataset

json encode(const DatasetManifest& m) {
  return {{"total", m.total},
          {"per_tier", m.per_tier},
          {"per_source", m.per_source},
          {"per_split", m.per_split},
          {"positive_fraction", m.positive_fraction},
          {"seed", m.seed},
          {"provenance", m.provenance},
          {"easy_rejected", m.easy_rejected},
          {"easy_shortfall", m.easy_shortfall},
          {"train_samples", m.train_samples}};
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.total = j.at("total").get<std::size_t>();
    m.per_tier = j.at("per_tier").get<std::map<std::string, std::size_t>>();
    m.per_source = j.at("per_source").get<std::map<std::string, std::size_t>>();
    m.per_split = j.at("per_split").get<std::map<std::string, std::size_t>>();
    m.positive_fraction = j.at("positive_fraction").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.provenance = j.value("provenance", json::array());
    m.easy_rejected = j.value("easy_rejected", std::size_t{0});
    m.easy_shortfall = j.value("easy_shortfall", std::size_t{0});
    m.train_samples = j.value("train_samples", std::size_t{0});
  } catch (const json::exception& e) {
    throw ParseError("manifest", e.what());
  }
  return m;
}

DatasetManifest summarize(std::span<const RewardSample> samples, std::uint64_t seed) {
  DatasetManifest m;
  m.seed = seed;
  m.total = samples.size();
  for (std::size_t i = 0; i < 4; ++i) m.per_tier[std::string(to_string(static_cast<DifficultyTier>(i)))] = 0;
  for (std::size_t i = 0; i < 2; ++i) m.per_split[std::string(to_string(static_cast<Split>(i)))] = 0;
  std::size_t positives = 0;
  for (const auto& s : samples) {
    ++m.per_tier[std::string(to_string(s.tier))];
    ++m.per_source[std::string(to_string(s.source))];
    ++m.per_split[std::string(to_string(s.split))];
    positives += s.label ? 1 : 0;
    m.train_samples += s.split == Split::idd ? 1 : 0;
  }
  m.positive_fraction =
      samples.empty() ? 0.0 : static_cast<double>(positives) / static_cast<double>(samples.size());
  return m;
}

Dataset build_dataset(const SamplePools& pools, const std::array<double, 4>& weights,
                      std::size_t total, std::uint64_t seed) {
  const auto counts = tier_counts(weights, total);
  std::ostringstream shortfall;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto have = pools.by_tier[i].size();
    if (have < counts[i]) {
      if (shortfall.tellp() > 0) shortfall << "; ";
      shortfall << to_string(static_cast<DifficultyTier>(i)) << ": need " << counts[i]
                << ", have " << have << " (short " << counts[i] - have << ")";
    }
  }
  if (shortfall.tellp() > 0) throw ConfigError("infeasible tier weights: " + shortfall.str());

  Dataset d;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& pool = pools.by_tier[i];
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    Rng rng(KeyHasher(seed).add("draw").add(i).value());
    rng.shuffle(idx);
    for (std::size_t k = 0; k < counts[i]; ++k) d.samples.push_back(pool[idx[k]]);
  }
  std::sort(d.samples.begin(), d.samples.end(), [](const RewardSample& a, const RewardSample& b) {
    if (a.source != b.source) return to_string(a.source) < to_string(b.source);
    return a.id < b.id;
  });
  d.manifest = summarize(d.samples, seed);
  d.manifest.provenance = pools.provenance;
  d.manifest.easy_rejected = pools.easy_rejected;
  d.manifest.easy_shortfall = pools.easy_shortfall;
  return d;
}

std::vector<RewardSample> training_split(std::span<const RewardSample> samples) {
  std::vector<RewardSample> out;
  for (const auto& s : samples) {
    if (s.split == Split::idd) out.push_back(s);
  }
  return out;
}

void export_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_records(dir / "rms_dataset.jsonl", dataset.samples);
  write_records(dir / "rms_train.jsonl", training_split(dataset.samples));
  write_json_file(dir / "manifest.json", encode(dataset.manifest));
}

Dataset synthesize_dataset(const World& world, const InstructionCatalog& catalog,
                           const SynthConfig& config) {
  const auto pools = synthesize_pools(world, catalog, config);
  return build_dataset(pools, config.tier_weights, config.total_samples, config.seed);
}

}  // namespace rms
