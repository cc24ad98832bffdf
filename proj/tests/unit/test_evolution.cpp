#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "rms/evolution.hpp"

namespace rms {
namespace {

namespace fs = std::filesystem;

AgentRecord record_for(const World& w, std::size_t task, std::size_t step, Action a_star,
                       Split split = Split::idd) {
  AgentRecord r;
  r.provenance = {0, static_cast<int>(task), static_cast<int>(step) + 1};
  r.context = gt_context(w.trajectories[task], step);
  r.a_star = std::move(a_star);
  r.split = split;
  return r;
}

RmsRecord rms_for(std::string pattern, Split split = Split::idd) {
  RmsRecord r;
  r.pattern = std::move(pattern);
  r.split = split;
  return r;
}

const EvolutionResult& default_run() {
  static const EvolutionResult r = [] {
    EvolutionConfig c;
    c.seed = 11;
    c.workers = 4;
    return simulate_evolution(testing::shared_world(), c);
  }();
  return r;
}

TEST(AgentReflux, EmptySetIsIdentity) {
  EvolutionConfig c;
  const auto s0 = initial_state(c);
  const auto s1 = apply_agent_reflux(s0, {});
  EXPECT_EQ(s1.policy, s0.policy);
  EXPECT_EQ(s1.ds_noise, s0.ds_noise);
}

TEST(AgentReflux, SingleRecordIsReplayed) {
  const auto& w = testing::shared_world();
  const Action endorsed = Action::click(0.123, 0.456);
  const std::vector<AgentRecord> recs{record_for(w, 2, 1, endorsed)};
  const auto s = apply_agent_reflux(initial_state({}), recs);
  ASSERT_EQ(s.policy.size(), 1u);
  const TablePolicy policy(s);
  const auto& t = w.trajectories[2];
  EXPECT_EQ(policy.propose(gt_context(t, 1), t.steps[1].ground_truth), endorsed);
  // unseen contexts fall back to the scripted base
  const ScriptedAgent base(s.base_profile, s.agent_seed);
  EXPECT_EQ(policy.propose(gt_context(t, 2), t.steps[2].ground_truth),
            base.propose(gt_context(t, 2), t.steps[2].ground_truth));
}

TEST(AgentReflux, SkipsUnresolvedAndOutOfDomain) {
  const auto& w = testing::shared_world();
  auto unresolved = record_for(w, 2, 1, Action::back());
  unresolved.unresolved = true;
  const std::vector<AgentRecord> recs{unresolved, record_for(w, 3, 1, Action::back(), Split::ood)};
  EXPECT_TRUE(apply_agent_reflux(initial_state({}), recs).policy.empty());
}

TEST(AgentReflux, LaterRecordsWin) {
  const auto& w = testing::shared_world();
  const std::vector<AgentRecord> recs{record_for(w, 2, 1, Action::back()),
                                      record_for(w, 2, 1, Action::home())};
  const auto s = apply_agent_reflux(initial_state({}), recs);
  ASSERT_EQ(s.policy.size(), 1u);
  EXPECT_EQ(s.policy.begin()->second, Action::home());
}

TEST(RmsReflux, EmptySetIsIdentity) {
  EvolutionConfig c;
  const auto s0 = initial_state(c);
  EXPECT_EQ(apply_rms_reflux(s0, {}, 0.5).ds_noise, s0.ds_noise);
}

TEST(RmsReflux, ReducesEachPatternOncePerCall) {
  EvolutionConfig c;
  c.ds_noise = 0.4;
  const auto s0 = initial_state(c);
  const std::vector<RmsRecord> recs{rms_for("spatial/click"), rms_for("spatial/click"),
                                    rms_for("none/back"), rms_for("type/swipe", Split::ood)};
  const auto s1 = apply_rms_reflux(s0, recs, 0.5);
  EXPECT_DOUBLE_EQ(s1.ds_noise.rate("spatial/click"), 0.2);
  EXPECT_DOUBLE_EQ(s1.ds_noise.rate("none/back"), 0.2);
  EXPECT_DOUBLE_EQ(s1.ds_noise.rate("type/swipe"), 0.4);
  EXPECT_DOUBLE_EQ(s1.ds_noise.rate("semantic/input_text"), 0.4);
}

TEST(RmsReflux, FactorOneZeroesThePattern) {
  EvolutionConfig c;
  const auto s = apply_rms_reflux(initial_state(c), std::vector{rms_for("none/click")}, 1.0);
  EXPECT_DOUBLE_EQ(s.ds_noise.rate("none/click"), 0.0);
}

TEST(RmsReflux, RejectsBadFactor) {
  for (double f : {0.0, -0.1, 1.5}) {
    EXPECT_THROW(apply_rms_reflux(initial_state({}), {}, f), ConfigError) << f;
  }
}

TEST(SplitMetricTest, AllIsPooled) {
  SplitMetric m;
  for (int i = 0; i < 30; ++i) m.add(Split::idd, i < 27);
  for (int i = 0; i < 10; ++i) m.add(Split::ood, i < 5);
  EXPECT_DOUBLE_EQ(m.idd(), 90.0);
  EXPECT_DOUBLE_EQ(m.ood(), 50.0);
  EXPECT_DOUBLE_EQ(m.all(), 80.0);
  EXPECT_EQ(m.n(), 40u);
}

TEST(Evolve, DisagreementsDecreaseStrictly) {
  const auto& rounds = default_run().rounds;
  ASSERT_EQ(rounds.size(), 3u);
  for (std::size_t r = 1; r < rounds.size(); ++r) {
    EXPECT_LT(rounds[r].disagreements, rounds[r - 1].disagreements) << r;
  }
}

TEST(Evolve, MetricsAreMonotoneWithLargestFirstGain) {
  const auto& rounds = default_run().rounds;
  using Get = double (SplitMetric::*)() const;
  for (Get g : {Get{&SplitMetric::all}, Get{&SplitMetric::idd}, Get{&SplitMetric::ood}}) {
    for (auto metric : {&RoundReport::agent_sr, &RoundReport::ds_acc}) {
      const double v0 = (rounds[0].*metric.*g)();
      const double v1 = (rounds[1].*metric.*g)();
      const double v2 = (rounds[2].*metric.*g)();
      EXPECT_LE(v0, v1);
      EXPECT_LE(v1, v2);
    }
  }
  for (auto metric : {&RoundReport::agent_sr, &RoundReport::ds_acc}) {
    const double g1 = (rounds[1].*metric).all() - (rounds[0].*metric).all();
    const double g2 = (rounds[2].*metric).all() - (rounds[1].*metric).all();
    EXPECT_GT(g1, 0.0);
    EXPECT_GT(g1, g2);
  }
}

TEST(Evolve, EndorsedActionsFailOnlyWhenUnresolved) {
  // Noise-free GP: a wrong endorsed action means DS accepted it and no
  // correction existed.
  for (const auto& r : default_run().rounds) {
    const auto& e = r.endorsed_sr;
    EXPECT_EQ(e.n() - e.idd_correct - e.ood_correct, r.unresolved) << r.round;
    EXPECT_GE(e.all(), r.agent_sr.all());
  }
}

TEST(Evolve, OodNeverEntersThePolicy) {
  const auto& w = testing::shared_world();
  for (const auto& [key, action] : default_run().final_state.policy) {
    const auto task = key.substr(0, key.find('|'));
    EXPECT_EQ(w.split_of_app(w.trajectories[w.task_index(task)].app), Split::idd) << key;
  }
}

TEST(Evolve, NoiseFreeRunIsFlatAtCeiling) {
  EvolutionConfig c;
  c.seed = 4;
  c.ds_noise = 0.0;
  c.agent_profile = {};
  c.episodes_per_round = 60;
  const auto res = simulate_evolution(testing::shared_world(), c);
  for (const auto& r : res.rounds) {
    EXPECT_DOUBLE_EQ(r.agent_sr.all(), 100.0);
    EXPECT_DOUBLE_EQ(r.ds_acc.all(), 100.0);
    EXPECT_EQ(r.disagreements, 0u);
  }
}

TEST(Evolve, DeterministicAcrossWorkers) {
  EvolutionConfig c;
  c.seed = 5;
  c.episodes_per_round = 80;
  c.workers = 1;
  const auto a = simulate_evolution(testing::shared_world(), c);
  c.workers = 6;
  const auto b = simulate_evolution(testing::shared_world(), c);
  EXPECT_EQ(evolution_report(c, a.rounds).dump(), evolution_report(c, b.rounds).dump());
}

TEST(Evolve, ReportRowsAreConsistent) {
  const auto& rounds = default_run().rounds;
  const auto rows = round_rows(rounds);
  EXPECT_NO_THROW(check_consistency(rows));
  std::size_t per_round = 0;
  for (const auto& r : rows) per_round += r.round == 0;
  EXPECT_EQ(rows.size(), per_round * rounds.size());
  EvolutionConfig c;
  const auto doc = evolution_report(c, rounds);
  EXPECT_FALSE(doc.at("no_data").get<bool>());
  EXPECT_EQ(report_rows(doc), sorted_rows(rows));
  const auto csv = evolution_csv(rounds);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(6 * rounds.size()) + 1);
}

TEST(Evolve, ExportWritesBothFiles) {
  const auto dir = fs::temp_directory_path() / "rms_evolution_export";
  fs::remove_all(dir);
  EvolutionConfig c;
  export_evolution(dir, c, default_run().rounds);
  EXPECT_TRUE(fs::exists(dir / "evolution_report.json"));
  EXPECT_TRUE(fs::exists(dir / "evolution_report.csv"));
}

TEST(EvolutionConfigTest, JsonRoundTripAndValidation) {
  EvolutionConfig c;
  c.seed = 99;
  c.rounds = 5;
  c.revisit = false;
  c.ds_noise = 0.1;
  const auto back = evolution_config_from_json(encode(c));
  EXPECT_EQ(encode(back), encode(c));

  auto bad = c;
  bad.rounds = 0;
  EXPECT_THROW(check_evolution_config(bad), ConfigError);
  bad = c;
  bad.ds_noise = 1.2;
  EXPECT_THROW(check_evolution_config(bad), ConfigError);
  bad = c;
  bad.reduction_factor = 0.0;
  EXPECT_THROW(check_evolution_config(bad), ConfigError);
  bad = c;
  bad.episodes_per_round = 0;
  EXPECT_THROW(check_evolution_config(bad), ConfigError);
}

TEST(Discrimination, BenchmarkPairsGroundTruthWithProposals) {
  const auto& w = testing::shared_world();
  const std::vector<std::size_t> tasks{0, 1, 2};
  EvolutionConfig c;
  const auto items = discrimination_benchmark(w, tasks, initial_state(c), false);
  std::size_t steps = 0;
  for (auto t : tasks) steps += w.trajectories[t].size();
  ASSERT_EQ(items.size(), 2 * steps);
  for (const auto& item : items) {
    const auto ref = w.lookup(item.input.context.instruction.id, item.input.context.step_index);
    EXPECT_EQ(item.label, verify(item.input.context, ref.ground_truth(), item.input.a_pred).passed);
  }
  const OracleDsBackend clean(w, {.use_eok = false});
  EXPECT_DOUBLE_EQ(ds_accuracy(clean, items).all(), 100.0);
}

}  // namespace
}  // namespace rms
