#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "fixtures.hpp"
#include "rms/pipeline.hpp"

namespace rms {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

/// Always proposes a fixed action.
class FixedAgent : public AgentPolicy {
 public:
  explicit FixedAgent(Action a) : a_(std::move(a)) {}
  Action propose(const StepContext&, const StepGroundTruth&) const override { return a_; }

 private:
  Action a_;
};

class ThrowingDs : public DsBackend {
 public:
  DsVerdict ds_evaluate(const DsInput&) const override { throw DataError("backend down"); }
};

/// Records every DS verdict so the GP side can check it sees the same one.
class SpyDs : public DsBackend {
 public:
  explicit SpyDs(const DsBackend& inner) : inner_(inner) {}
  DsVerdict ds_evaluate(const DsInput& in) const override {
    auto v = inner_.ds_evaluate(in);
    std::lock_guard lock(mu_);
    last_[key(in.context)] = v;
    return v;
  }
  std::optional<DsVerdict> last(const StepContext& c) const {
    std::lock_guard lock(mu_);
    auto it = last_.find(key(c));
    if (it == last_.end()) return std::nullopt;
    return it->second;
  }
  static std::string key(const StepContext& c) {
    return c.instruction.id + "#" + std::to_string(c.step_index);
  }

 private:
  const DsBackend& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, DsVerdict> last_;
};

class SpyGp : public GpBackend {
 public:
  SpyGp(const GpBackend& inner, const SpyDs& ds) : inner_(inner), ds_(ds) {}
  GpVerdict gp_evaluate(const GpInput& in) const override {
    const auto seen = ds_.last(in.context);
    if (!seen || !(*seen == in.ds)) ++stale;
    return inner_.gp_evaluate(in);
  }
  mutable std::atomic<int> stale{0};

 private:
  const GpBackend& inner_;
  const SpyDs& ds_;
};

struct Harness {
  const World& w = testing::shared_world();
  OracleDsBackend ds;
  OracleGpBackend gp;
  Harness(OracleDsConfig dc = {.use_eok = false}, OracleGpConfig gc = {.use_eok = false})
      : ds(testing::shared_world(), dc), gp(testing::shared_world(), gc) {}
  Backends backends() const { return {ds, gp}; }

  StepOutcome step(const AgentPolicy& agent, std::size_t task, std::size_t i) const {
    const auto& t = w.trajectories[task];
    return evaluate_step(agent, backends(), gt_context(t, i),
                         {t.steps[i].ground_truth, &w.eok[task], w.split_of_app(t.app)},
                         {0, static_cast<int>(task), static_cast<int>(i) + 1});
  }
};

TEST(EvaluateStep, AgreementKeepsThePrediction) {
  Harness h;
  const auto& t = h.w.trajectories[1];
  const FixedAgent agent(t.steps[1].ground_truth.a_gt);
  const auto o = h.step(agent, 1, 1);
  EXPECT_TRUE(o.ds.y_ds);
  EXPECT_TRUE(o.gp.y_gp);
  EXPECT_EQ(o.a_star, o.a_pred);
  EXPECT_EQ(o.source, StarSource::prediction);
  EXPECT_TRUE(o.agent_record);
  EXPECT_FALSE(o.rms_record);
  EXPECT_EQ(*o.reward, 1.0);
}

TEST(EvaluateStep, PreferredCorrectionBecomesAStar) {
  Harness h;
  const FixedAgent agent(Action::click(0.001, 0.001));
  const auto o = h.step(agent, 1, 1);
  EXPECT_FALSE(o.ds.y_ds);
  ASSERT_TRUE(o.ds.a_corr);
  EXPECT_EQ(o.gp.s_gp.preference, Preference::prefer_corr);
  EXPECT_EQ(o.a_star, *o.ds.a_corr);
  EXPECT_EQ(o.source, StarSource::correction);
  EXPECT_TRUE(*o.star_correct);
  EXPECT_FALSE(*o.pred_correct);
  EXPECT_EQ(o.agent_record->a_star, o.a_star);
  EXPECT_EQ(*o.reward, 1.0);
}

TEST(EvaluateStep, GpOverridesANoisyRejection) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.rates["none/click"] = 1.0;
  Harness h(dc);
  const auto& t = h.w.trajectories[1];
  const FixedAgent agent(t.steps[1].ground_truth.a_gt);
  const auto o = h.step(agent, 1, 1);
  ASSERT_TRUE(verify(gt_context(t, 1), t.steps[1].ground_truth, o.a_pred).passed);
  EXPECT_FALSE(o.ds.y_ds);
  EXPECT_FALSE(o.gp.y_gp);
  EXPECT_EQ(o.gp.s_gp.preference, Preference::prefer_pred);
  EXPECT_EQ(o.a_star, o.a_pred);
  ASSERT_TRUE(o.rms_record);
  EXPECT_TRUE(o.rms_record->high_priority);
  EXPECT_EQ(o.rms_record->pattern, "none/click");
  EXPECT_EQ(o.rms_record->z_gp.ds, o.ds);
  EXPECT_EQ(*o.reward, -0.2);
  EXPECT_FALSE(o.unresolved);
}

TEST(EvaluateStep, FalseAcceptWithoutCorrectionIsUnresolved) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.rates["spatial/click"] = 1.0;
  Harness h(dc);
  const FixedAgent agent(Action::click(0.001, 0.001));
  const auto o = h.step(agent, 1, 1);
  EXPECT_TRUE(o.ds.y_ds);
  EXPECT_FALSE(o.gp.y_gp);
  EXPECT_TRUE(o.unresolved);
  EXPECT_EQ(o.a_star, o.a_pred);
  EXPECT_TRUE(o.agent_record->unresolved);
  EXPECT_EQ(*o.reward, -0.5);
}

TEST(EvaluateStep, BackendFailuresCarryProvenance) {
  Harness h;
  const ThrowingDs bad;
  const auto& t = h.w.trajectories[0];
  try {
    evaluate_step(FixedAgent(Action::back()), {bad, h.gp}, gt_context(t, 2),
                  {t.steps[2].ground_truth, nullptr, Split::idd}, {4, 9, 3});
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.where(), (Provenance{4, 9, 3}));
    EXPECT_NE(std::string(e.what()).find("backend down"), std::string::npos);
  }
}

TEST(RouteReflux, AppendsOnceAndRmsOnlyOnDisagreement) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.rates["none/click"] = 1.0;
  Harness clean;
  Harness noisy(dc);
  const auto& t = clean.w.trajectories[1];
  const FixedAgent agent(t.steps[1].ground_truth.a_gt);
  RefluxStores stores;
  route_reflux(clean.step(agent, 1, 1), stores);
  EXPECT_EQ(stores.agent_size(), 1u);
  EXPECT_EQ(stores.rms_size(), 0u);
  route_reflux(noisy.step(agent, 1, 1), stores);
  EXPECT_EQ(stores.agent_size(), 2u);
  EXPECT_EQ(stores.rms_size(), 1u);
}

TEST(RunEpisode, ZeroErrorAgentIsPerfect) {
  Harness h;
  const ScriptedAgent agent(AgentErrorProfile{}, 0);
  RefluxStores stores;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto r = run_episode(agent, h.backends(), h.w, h.w.trajectories[k], stores, 0, static_cast<int>(k));
    EXPECT_DOUBLE_EQ(r.sr(), 1.0);
    EXPECT_DOUBLE_EQ(r.raw_sr(), 1.0);
    EXPECT_TRUE(r.completed);
  }
  EXPECT_EQ(stores.rms_size(), 0u);
}

TEST(RunEpisode, HistoryFollowsTheEndorsedAction) {
  Harness h;
  const ScriptedAgent agent({0.0, 1.0, 0.0, 0.0, 0.2}, 3);
  RefluxStores stores;
  const auto& t = h.w.trajectories[4];
  const auto r = run_episode(agent, h.backends(), h.w, t, stores, 0, 0);
  const auto records = stores.agent_records();
  ASSERT_EQ(records.size(), t.size());
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& prev = records[i - 1];
    EXPECT_EQ(records[i].context.history.back(), history_entry(prev.context.screen, prev.a_star));
  }
  EXPECT_EQ(r.steps.size(), t.size());
}

TEST(RunEpisode, CompletionFollowsTerminalEndorsement) {
  Harness h;
  const auto& t = h.w.trajectories[6];
  RefluxStores stores;
  // An agent that always says Complete: endorsed only on the terminal step.
  const auto r = run_episode(FixedAgent(Action::complete()), h.backends(), h.w, t, stores, 0, 0);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.completed, r.steps.back().gp.e_gp);
  for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) EXPECT_FALSE(r.steps[i].gp.e_gp);

  OracleGpConfig gc{.use_eok = false};
  gc.noise_rate = 1.0;
  Harness flipped({.use_eok = false}, gc);
  const auto r2 = run_episode(FixedAgent(Action::complete()), flipped.backends(), h.w, t, stores, 0, 1);
  EXPECT_EQ(r2.completed, r2.steps.back().gp.e_gp);
}

TEST(Closure, NoiseFreeOraclesEndorseOnlyCorrectActions) {
  for (bool eok : {false, true}) {
    Harness h({.use_eok = eok}, {.use_eok = eok});
    const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, 17);
    RefluxStores stores;
    const auto tasks = select_episodes(h.w, 200, 5);
    const auto reports = run_episodes(agent, h.backends(), h.w, tasks, stores, 0, {.use_eok = eok}, 4);
    ASSERT_EQ(reports.size(), 200u);
    const auto s = summarize(reports);
    EXPECT_EQ(s.star_correct, s.steps);
    EXPECT_LT(s.pred_correct, s.steps);
    EXPECT_EQ(s.disagreements, 0u);
    for (const auto& r : reports) {
      for (const auto& o : r.steps) {
        const auto& t = h.w.trajectories[h.w.task_index(r.task_id)];
        const auto ctx = o.agent_record->context;
        ASSERT_TRUE(verify(ctx, t.steps[o.provenance.step - 1].ground_truth, o.a_star,
                           eok ? &h.w.eok_for(r.task_id) : nullptr)
                        .passed);
      }
    }
  }
}

TEST(Closure, GroundingOnlyAgentEndorsedPerfectRawLower) {
  Harness h;
  const ScriptedAgent agent({0.0, 0.3, 0.0, 0.0, 0.1}, 2);
  RefluxStores stores;
  const auto reports = run_episodes(agent, h.backends(), h.w, select_episodes(h.w, 200, 1), stores, 0);
  const auto s = summarize(reports);
  const double endorsed = static_cast<double>(s.star_correct) / static_cast<double>(s.steps);
  const double raw = static_cast<double>(s.pred_correct) / static_cast<double>(s.steps);
  EXPECT_DOUBLE_EQ(endorsed, 1.0);
  // Offsets that stay inside the box and point-free steps keep raw SR well above 0.7.
  EXPECT_GT(raw, 0.7);
  EXPECT_LT(raw, 1.0);
}

TEST(Reflux, ExactlyOnceAcrossSeeds) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    OracleDsConfig dc{.use_eok = false, .seed = seed};
    dc.noise.base_rate = 0.2;
    OracleGpConfig gc{.use_eok = false, .noise_rate = 0.05, .seed = seed};
    Harness h(dc, gc);
    const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, seed);
    RefluxStores stores;
    const auto reports = run_episodes(agent, h.backends(), h.w, select_episodes(h.w, 150, seed), stores, 0, {}, 3);
    std::size_t steps = 0, overrides = 0;
    for (const auto& r : reports) {
      for (const auto& o : r.steps) {
        ++steps;
        overrides += !o.gp.y_gp;
      }
    }
    EXPECT_EQ(stores.agent_size(), steps) << "seed " << seed;
    EXPECT_EQ(stores.rms_size(), overrides) << "seed " << seed;
    EXPECT_GT(overrides, 0u);
  }
}

TEST(Reflux, RmsGrowthMatchesBinomialExpectation) {
  // Noise-free GP catches every DS flip, so growth ~ Binomial(N, p).
  const double p = 0.15;
  for (std::uint64_t seed : {10u, 11u, 12u}) {
    OracleDsConfig dc{.use_eok = false, .seed = seed};
    dc.noise.base_rate = p;
    Harness h(dc);
    const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, seed);
    RefluxStores stores;
    const auto reports = run_episodes(agent, h.backends(), h.w, select_episodes(h.w, 200, seed), stores, 0);
    const double n = static_cast<double>(summarize(reports).steps);
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(stores.rms_size()), n * p, 4 * sigma) << "seed " << seed;
  }
}

TEST(Reflux, GpAlwaysSeesTheSameStepsDsVerdict) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.base_rate = 0.3;
  Harness h(dc);
  const SpyDs ds(h.ds);
  const SpyGp gp(h.gp, ds);
  const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, 1);
  RefluxStores stores;
  // one worker: the spy keys on (task, step), which revisits would overwrite
  const auto reports = run_episodes(agent, {ds, gp}, h.w, select_episodes(h.w, 100, 2), stores, 0, {}, 1);
  EXPECT_EQ(gp.stale.load(), 0);
  for (const auto& r : stores.rms_records()) {
    EXPECT_EQ(r.z_gp.context.step_index, r.provenance.step);
  }
  for (const auto& rep : reports) {
    for (const auto& o : rep.steps) {
      if (o.rms_record) EXPECT_EQ(o.rms_record->z_gp.ds, o.ds);
    }
  }
}

TEST(Stores, ExportIsIndependentOfWorkerCount) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.base_rate = 0.2;
  Harness h(dc);
  const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, 9);
  const auto tasks = select_episodes(h.w, 120, 3);
  std::vector<fs::path> dirs;
  for (std::size_t workers : {1u, 8u}) {
    RefluxStores stores;
    run_episodes(agent, h.backends(), h.w, tasks, stores, 2, {}, workers);
    dirs.push_back(fs::temp_directory_path() / ("rms_stores_" + std::to_string(workers)));
    fs::remove_all(dirs.back());
    fs::create_directories(dirs.back());
    stores.export_to(dirs.back());
  }
  for (const char* f : {"agent_training_set.jsonl", "rms_training_set.jsonl"}) {
    EXPECT_EQ(slurp(dirs[0] / f), slurp(dirs[1] / f)) << f;
    EXPECT_FALSE(slurp(dirs[0] / f).empty()) << f;
  }
  const auto back = read_records<RmsRecord>(dirs[0] / "rms_training_set.jsonl");
  for (const auto& r : back) EXPECT_EQ(r.provenance.round, 2);
}

TEST(Stores, RecordsRoundTrip) {
  OracleDsConfig dc{.use_eok = false};
  dc.noise.base_rate = 0.5;
  Harness h(dc);
  const ScriptedAgent agent({0.1, 0.3, 0.1, 0.1, 0.1}, 9);
  RefluxStores stores;
  run_episodes(agent, h.backends(), h.w, select_episodes(h.w, 20, 1), stores, 1);
  for (const auto& r : stores.agent_records()) EXPECT_EQ(decode<AgentRecord>(encode(r)), r);
  for (const auto& r : stores.rms_records()) EXPECT_EQ(decode<RmsRecord>(encode(r)), r);
  const auto a = stores.agent_records();
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LE(a[i - 1].provenance, a[i].provenance);
}

TEST(Episodes, SelectionCyclesAndIsSeeded) {
  const auto& w = testing::shared_world();
  const auto a = select_episodes(w, 450, 3);
  ASSERT_EQ(a.size(), 450u);
  EXPECT_EQ(a, select_episodes(w, 450, 3));
  EXPECT_NE(a, select_episodes(w, 450, 4));
  std::vector<std::size_t> first(a.begin(), a.begin() + 200);
  std::sort(first.begin(), first.end());
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(first[i], i);
  EXPECT_TRUE(std::equal(a.begin(), a.begin() + 200, a.begin() + 200));
}

}  // namespace
}  // namespace rms
