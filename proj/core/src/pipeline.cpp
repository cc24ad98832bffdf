#include "rms/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "rms/parallel.hpp"
#include "rms/rng.hpp"

namespace rms {

std::string to_string(const Provenance& p) {
  return "round " + std::to_string(p.round) + " episode " + std::to_string(p.episode) + " step " +
         std::to_string(p.step);
}

std::string_view to_string(StarSource s) noexcept {
  return s == StarSource::prediction ? "prediction" : "correction";
}

// ---------------------------------------------------------------------------
// Records

namespace {

void put_provenance(json& j, const Provenance& p) {
  j["round"] = p.round;
  j["episode"] = p.episode;
  j["step"] = p.step;
}

Provenance take_provenance(const json& j, const DecodeCtx& ctx) {
  Provenance p;
  p.round = static_cast<int>(ctx.at("round").integer(ctx.require(j, "round")));
  p.episode = static_cast<int>(ctx.at("episode").integer(ctx.require(j, "episode")));
  p.step = static_cast<int>(ctx.at("step").integer(ctx.require(j, "step")));
  return p;
}

}  // namespace

json encode(const AgentRecord& r) {
  json j = {{"context", encode(r.context)},
            {"a_star", encode(r.a_star)},
            {"split", to_string(r.split)},
            {"unresolved", r.unresolved}};
  put_provenance(j, r.provenance);
  return j;
}

json encode(const RmsRecord& r) {
  json j = {{"z_gp", encode(r.z_gp)},
            {"gp_verdict", encode(r.gp)},
            {"high_priority", r.high_priority},
            {"pattern", r.pattern},
            {"split", to_string(r.split)}};
  put_provenance(j, r.provenance);
  return j;
}

void read(const json& j, const DecodeCtx& ctx, AgentRecord& out) {
  ctx.object(j);
  ctx.check_keys(j, {"round", "episode", "step", "context", "a_star", "split", "unresolved"});
  out.provenance = take_provenance(j, ctx);
  read(ctx.require(j, "context"), ctx.at("context"), out.context);
  read(ctx.require(j, "a_star"), ctx.at("a_star"), out.a_star);
  out.split = ctx.at("split").enumeration<Split>(ctx.require(j, "split"));
  out.unresolved = ctx.at("unresolved").boolean(ctx.require(j, "unresolved"));
}

void read(const json& j, const DecodeCtx& ctx, RmsRecord& out) {
  ctx.object(j);
  ctx.check_keys(j, {"round", "episode", "step", "z_gp", "gp_verdict", "high_priority", "pattern",
                     "split"});
  out.provenance = take_provenance(j, ctx);
  read(ctx.require(j, "z_gp"), ctx.at("z_gp"), out.z_gp);
  read(ctx.require(j, "gp_verdict"), ctx.at("gp_verdict"), out.gp);
  out.high_priority = ctx.at("high_priority").boolean(ctx.require(j, "high_priority"));
  out.pattern = ctx.at("pattern").string(ctx.require(j, "pattern"));
  out.split = ctx.at("split").enumeration<Split>(ctx.require(j, "split"));
}

// ---------------------------------------------------------------------------
// Stores

void RefluxStores::append(AgentRecord r) {
  std::lock_guard lock(mu_);
  agent_.push_back(std::move(r));
}

void RefluxStores::append(RmsRecord r) {
  std::lock_guard lock(mu_);
  rms_.push_back(std::move(r));
}

namespace {

template <class R>
std::vector<R> by_provenance(std::vector<R> v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const R& a, const R& b) { return a.provenance < b.provenance; });
  return v;
}

}  // namespace

std::vector<AgentRecord> RefluxStores::agent_records() const {
  std::lock_guard lock(mu_);
  return by_provenance(agent_);
}

std::vector<RmsRecord> RefluxStores::rms_records() const {
  std::lock_guard lock(mu_);
  return by_provenance(rms_);
}

std::size_t RefluxStores::agent_size() const {
  std::lock_guard lock(mu_);
  return agent_.size();
}

std::size_t RefluxStores::rms_size() const {
  std::lock_guard lock(mu_);
  return rms_.size();
}

void RefluxStores::export_to(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_records(dir / "agent_training_set.jsonl", agent_records());
  write_records(dir / "rms_training_set.jsonl", rms_records());
}

// ---------------------------------------------------------------------------
// Steps and episodes

StepOutcome evaluate_step(const AgentPolicy& agent, const Backends& backends,
                          const StepContext& context, const StepTruth& truth,
                          Provenance provenance, const PipelineOptions& options) {
  StepOutcome o;
  o.provenance = provenance;
  o.split = truth.split;
  GpInput z_gp;
  try {
    o.a_pred = agent.propose(context, truth.gt);
    o.ds = backends.ds.ds_evaluate(DsInput{context, o.a_pred});
    z_gp = GpInput{context, o.a_pred, o.ds};
    o.gp = backends.gp.gp_evaluate(z_gp);
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(provenance, e.what());
  }
  if (auto bad = validate(o.gp, z_gp); !bad.empty()) {
    throw PipelineError(provenance, "invalid GP verdict: " + bad.front());
  }

  if (o.gp.s_gp.preference == Preference::prefer_corr && o.ds.a_corr) {
    o.a_star = *o.ds.a_corr;
    o.source = StarSource::correction;
  } else {
    o.a_star = o.a_pred;
  }
  o.unresolved = !o.gp.y_gp && !o.ds.a_corr;

  std::string pattern = "unknown/" + std::string(to_string(o.a_pred.type()));
  if (options.score) {
    const EokGraph* eok = options.use_eok ? truth.eok : nullptr;
    const VerifierConfig vc{options.text};
    const auto pred = verify(context, truth.gt, o.a_pred, eok, vc);
    o.pred_correct = pred.passed;
    o.star_correct = o.source == StarSource::prediction
                         ? pred.passed
                         : verify(context, truth.gt, o.a_star, eok, vc).passed;
    o.reward = ds_reward(o.ds.y_ds, pred.passed);
    pattern = pattern_key(pred.failure_or_none(), o.a_pred.type());
  }

  o.agent_record = AgentRecord{provenance, context, o.a_star, truth.split, o.unresolved};
  if (!o.gp.y_gp) {
    o.rms_record = RmsRecord{provenance, std::move(z_gp), o.gp, true, std::move(pattern),
                             truth.split};
  }
  return o;
}

void route_reflux(const StepOutcome& outcome, RefluxStores& stores) {
  if (outcome.agent_record) stores.append(*outcome.agent_record);
  if (outcome.rms_record) stores.append(*outcome.rms_record);
}

std::size_t EpisodeReport::star_correct() const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const StepOutcome& o) { return o.star_correct.value_or(false); }));
}

std::size_t EpisodeReport::pred_correct() const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const StepOutcome& o) { return o.pred_correct.value_or(false); }));
}

std::size_t EpisodeReport::disagreements() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const StepOutcome& o) { return !o.gp.y_gp; }));
}

std::size_t EpisodeReport::unresolved() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const StepOutcome& o) { return o.unresolved; }));
}

double EpisodeReport::sr() const {
  return steps.empty() ? 0.0 : static_cast<double>(star_correct()) / static_cast<double>(size());
}

double EpisodeReport::raw_sr() const {
  return steps.empty() ? 0.0 : static_cast<double>(pred_correct()) / static_cast<double>(size());
}

EpisodeReport run_episode(const AgentPolicy& agent, const Backends& backends, const World& world,
                          const Trajectory& trajectory, RefluxStores& stores, int round,
                          int episode, const PipelineOptions& options) {
  EpisodeReport report;
  report.provenance = {round, episode, 0};
  report.task_id = trajectory.task.id;
  report.split = world.split_of_app(trajectory.app);
  const EokGraph& eok = world.eok_for(trajectory.task.id);

  std::vector<HistoryEntry> history;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const Provenance prov{round, episode, static_cast<int>(i + 1)};
    const StepContext context = make_context(trajectory, i, history);
    const StepTruth truth{trajectory.steps[i].ground_truth, &eok, report.split};
    StepOutcome outcome = evaluate_step(agent, backends, context, truth, prov, options);
    try {
      route_reflux(outcome, stores);
    } catch (const std::exception& e) {
      throw PipelineError(prov, std::string("reflux store: ") + e.what());
    }
    history.push_back(history_entry(context.screen, outcome.a_star));
    report.steps.push_back(std::move(outcome));
  }
  report.completed = !report.steps.empty() && report.steps.back().gp.e_gp;
  return report;
}

std::vector<std::size_t> select_episodes(const World& world, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(world.tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(KeyHasher(seed).add("episodes").value());
  rng.shuffle(order);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n && !order.empty(); ++i) out.push_back(order[i % order.size()]);
  return out;
}

std::vector<EpisodeReport> run_episodes(const AgentPolicy& agent, const Backends& backends,
                                        const World& world, std::span<const std::size_t> tasks,
                                        RefluxStores& stores, int round,
                                        const PipelineOptions& options, std::size_t workers) {
  return parallel_map<EpisodeReport>(tasks.size(), workers, [&](std::size_t e) {
    return run_episode(agent, backends, world, world.trajectories.at(tasks[e]), stores, round,
                       static_cast<int>(e), options);
  });
}

// ---------------------------------------------------------------------------
// Reports

json encode(const StepOutcome& o) {
  json j = {{"step", o.provenance.step},
            {"a_pred", encode(o.a_pred)},
            {"ds_verdict", encode(o.ds)},
            {"gp_verdict", encode(o.gp)},
            {"a_star", encode(o.a_star)},
            {"a_star_source", to_string(o.source)},
            {"unresolved", o.unresolved},
            {"rms_reflux", o.rms_record.has_value()}};
  if (o.reward) j["reward"] = *o.reward;
  if (o.pred_correct) j["pred_correct"] = *o.pred_correct;
  if (o.star_correct) j["star_correct"] = *o.star_correct;
  return j;
}

json encode(const EpisodeReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(encode(s));
  return {{"round", r.provenance.round},
          {"episode", r.provenance.episode},
          {"task_id", r.task_id},
          {"split", to_string(r.split)},
          {"completed", r.completed},
          {"sr", r.sr()},
          {"raw_sr", r.raw_sr()},
          {"steps", std::move(steps)}};
}

RunSummary summarize(std::span<const EpisodeReport> reports) {
  RunSummary s;
  for (const auto& r : reports) {
    ++s.episodes;
    s.steps += r.size();
    s.star_correct += r.star_correct();
    s.pred_correct += r.pred_correct();
    s.disagreements += r.disagreements();
    s.unresolved += r.unresolved();
    s.completed += r.completed ? 1 : 0;
    for (const auto& o : r.steps) s.reward_sum += o.reward.value_or(0.0);
  }
  return s;
}

json encode(const RunSummary& s) {
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  return {{"episodes", s.episodes},
          {"steps", s.steps},
          {"endorsed_sr", ratio(s.star_correct, s.steps)},
          {"raw_sr", ratio(s.pred_correct, s.steps)},
          {"disagreements", s.disagreements},
          {"unresolved", s.unresolved},
          {"completed", s.completed},
          {"mean_reward", s.steps == 0 ? 0.0 : s.reward_sum / static_cast<double>(s.steps)}};
}

}  // namespace rms
