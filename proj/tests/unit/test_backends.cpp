#include <gtest/gtest.h>
#include <httplib.h>

#include <cmath>
#include <cstdlib>

#include "fixtures.hpp"
#include "independent_rules.hpp"
#include "rms/agent.hpp"
#include "rms/backends.hpp"
#include "rms/metrics.hpp"
#include "rms/parallel.hpp"
#include "rms/remote.hpp"

namespace rms {
namespace {

namespace oracle = testing::oracle;

TEST(Reward, ExactTable) {
  EXPECT_EQ(ds_reward(true, true), 1.0);
  EXPECT_EQ(ds_reward(false, false), 1.0);
  EXPECT_EQ(ds_reward(true, false), -0.5);
  EXPECT_EQ(ds_reward(false, true), -0.2);
  EXPECT_GT(std::abs(ds_reward(true, false)), std::abs(ds_reward(false, true)));
  static_assert(ds_reward(true, false) == kRewardFalsePositive);
}

DsInput input_at(const Trajectory& t, std::size_t i, Action a) { return {gt_context(t, i), std::move(a)}; }

TEST(OracleDs, GroundTruthIsAccepted) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const auto& t = w.trajectories[0];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto v = ds.ds_evaluate(input_at(t, i, t.steps[i].ground_truth.a_gt));
    EXPECT_TRUE(v.y_ds);
    EXPECT_NE(v.r_ds.find("all rules satisfied"), std::string::npos);
    EXPECT_FALSE(v.a_corr);
    EXPECT_FALSE(v.r_corr);
  }
}

TEST(OracleDs, OffTargetClickGetsACenteredCorrection) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const auto& t = w.trajectories[3];
  const auto& st = t.steps[1];
  const std::string& region = st.ground_truth.valid_regions.front();
  const Box box = st.screen.find(region)->box;
  const Action miss = Action::click(box.x1 + 0.01, (box.y0 + box.y1) / 2);
  const auto v = ds.ds_evaluate(input_at(t, 1, miss));
  EXPECT_FALSE(v.y_ds);
  ASSERT_TRUE(v.a_corr);
  EXPECT_EQ(*v.a_corr, Action::click(box.center().u, box.center().v));
  EXPECT_TRUE(verify(gt_context(t, 1), st.ground_truth, *v.a_corr).passed);
  EXPECT_NE(v.r_corr->find("spatial"), std::string::npos);
}

TEST(OracleDs, WrongIntentFallsBackToTheReferenceAction) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const auto& t = w.trajectories[3];
  const auto v = ds.ds_evaluate(input_at(t, 0, Action::open_app("Not An App")));
  EXPECT_FALSE(v.y_ds);
  EXPECT_EQ(*v.a_corr, t.steps[0].ground_truth.a_gt);
  EXPECT_NE(v.r_corr->find("intent override"), std::string::npos);
}

TEST(OracleDs, EveryCorrectionPassesVerification) {
  const auto& w = testing::shared_world();
  for (bool eok : {false, true}) {
    const OracleDsBackend ds(w, {.use_eok = eok});
    const ScriptedAgent agent({0.2, 0.5, 0.2, 0.2, 0.1}, 21);
    for (std::size_t k = 0; k < w.trajectories.size(); ++k) {
      const auto& t = w.trajectories[k];
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto in = input_at(t, i, agent.propose(gt_context(t, i), t.steps[i].ground_truth));
        const auto v = ds.ds_evaluate(in);
        ASSERT_TRUE(validate(v).empty());
        ASSERT_EQ(v.y_ds, verify(in.context, t.steps[i].ground_truth, in.a_pred, eok ? &w.eok[k] : nullptr).passed);
        if (v.a_corr) {
          ASSERT_TRUE(verify(in.context, t.steps[i].ground_truth, *v.a_corr, eok ? &w.eok[k] : nullptr).passed);
        }
      }
    }
  }
}

TEST(OracleDs, MissingGroundTruthIsDataError) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  DsInput in = input_at(w.trajectories[0], 0, Action::back());
  in.context.instruction.id = "nope";
  EXPECT_THROW(ds.ds_evaluate(in), DataError);
}

TEST(OracleDs, ClosedLoopOnItsOwnDataset) {
  const auto& w = testing::shared_world();
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.total_samples = 1500;
  const auto d = synthesize_dataset(w, InstructionCatalog::from_world(w), cfg);
  const OracleDsBackend ds(w);
  const std::size_t n = d.samples.size();
  auto decisions = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    decisions[i] = ds.ds_evaluate({d.samples[i].context, d.samples[i].candidate}).y_ds;
  }
  for (const auto& row : discrimination_accuracy("oracle", {decisions.get(), n}, d.samples)) {
    EXPECT_DOUBLE_EQ(row.value, 100.0) << row.split << " " << row.metric;
  }
}

TEST(OracleDs, NoiseFlipsAtTheConfiguredRate) {
  const auto& w = testing::shared_world();
  OracleDsConfig cfg;
  cfg.noise.base_rate = 0.2;
  cfg.seed = 4;
  const OracleDsBackend ds(w, cfg);
  std::size_t flips = 0, n = 0;
  for (const auto& t : w.trajectories) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto in = input_at(t, i, t.steps[i].ground_truth.a_gt);
      const auto v = ds.ds_evaluate(in);
      ASSERT_EQ(v, ds.ds_evaluate(in));  // same input, same draw
      flips += !v.y_ds;
      ++n;
    }
  }
  const double p = static_cast<double>(flips) / static_cast<double>(n);
  EXPECT_NEAR(p, 0.2, 4 * std::sqrt(0.2 * 0.8 / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// GP oracle

GpInput gp_input(const DsInput& in, DsVerdict v) { return {in.context, in.a_pred, std::move(v)}; }

TEST(OracleGp, AgreementPath) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const OracleGpBackend gp(w);
  const auto& t = w.trajectories[2];
  const auto in = input_at(t, 1, t.steps[1].ground_truth.a_gt);
  const auto g = gp.gp_evaluate(gp_input(in, ds.ds_evaluate(in)));
  EXPECT_TRUE(g.y_gp);
  EXPECT_EQ(g.s_gp.preference, Preference::prefer_pred);
  EXPECT_FALSE(g.e_gp);
}

TEST(OracleGp, CatchesAWrongRejection) {
  const auto& w = testing::shared_world();
  const OracleGpBackend gp(w);
  const auto& t = w.trajectories[2];
  const auto in = input_at(t, 1, t.steps[1].ground_truth.a_gt);
  ASSERT_TRUE(verify(in.context, t.steps[1].ground_truth, in.a_pred).passed);
  DsVerdict wrong{false, "rejected: noise", t.steps[1].ground_truth.a_gt.with_point({0.5, 0.5}), "repair"};
  const auto g = gp.gp_evaluate(gp_input(in, wrong));
  EXPECT_FALSE(g.y_gp);
  EXPECT_EQ(g.s_gp.preference, Preference::prefer_pred);
}

TEST(OracleGp, PrefersAValidCorrection) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const OracleGpBackend gp(w);
  const auto& t = w.trajectories[2];
  const auto in = input_at(t, 1, Action::click(0.001, 0.001));
  const auto v = ds.ds_evaluate(in);
  const auto g = gp.gp_evaluate(gp_input(in, v));
  EXPECT_TRUE(g.y_gp);
  EXPECT_EQ(g.s_gp.preference, Preference::prefer_corr);
  EXPECT_TRUE(validate(g, gp_input(in, v)).empty());
}

TEST(OracleGp, TerminalCompleteSetsCompletion) {
  const auto& w = testing::shared_world();
  const OracleDsBackend ds(w);
  const OracleGpBackend gp(w);
  const auto& t = w.trajectories[2];
  const std::size_t last = t.size() - 1;
  const auto in = input_at(t, last, Action::complete());
  EXPECT_TRUE(gp.gp_evaluate(gp_input(in, ds.ds_evaluate(in))).e_gp);
  const auto early = input_at(t, last, Action::back());
  const auto v = ds.ds_evaluate(early);
  const auto g = gp.gp_evaluate(gp_input(early, v));
  // the endorsed action is the reference Complete supplied as correction
  EXPECT_EQ(g.s_gp.preference, Preference::prefer_corr);
  EXPECT_TRUE(g.e_gp);
}

TEST(Verdicts, InvariantChecks) {
  EXPECT_FALSE(validate(DsVerdict{true, "ok", Action::back(), std::nullopt}).empty());
  EXPECT_FALSE(validate(DsVerdict{false, "no", std::nullopt, std::string("why")}).empty());
  EXPECT_TRUE(validate(DsVerdict{false, "no", Action::back(), std::string("why")}).empty());
  GpInput in;
  in.ds = {true, "ok", std::nullopt, std::nullopt};
  GpVerdict g;
  g.s_gp.preference = Preference::prefer_corr;
  EXPECT_FALSE(validate(g, in).empty());
}

TEST(Verdicts, CodecRoundTrip) {
  testing::EntityGen gen(12);
  for (int i = 0; i < 200; ++i) {
    const DsInput in{gen.context(), gen.action()};
    EXPECT_EQ(decode<DsInput>(encode(in)), in);
    DsVerdict v{gen.rng().bernoulli(0.5), "r", std::nullopt, std::nullopt};
    if (!v.y_ds) {
      v.a_corr = gen.action();
      v.r_corr = "c";
    }
    EXPECT_EQ(decode<DsVerdict>(encode(v)), v);
    const GpInput gi{in.context, in.a_pred, v};
    EXPECT_EQ(decode<GpInput>(encode(gi)), gi);
    const GpVerdict gv{true, false, {Preference::prefer_pred, "intent"}};
    EXPECT_EQ(decode<GpVerdict>(encode(gv)), gv);
  }
  EXPECT_EQ(encode(DsVerdict{true, "ok", std::nullopt, std::nullopt}).dump(), R"({"r_ds":"ok","y_ds":1})");
}

TEST(Noise, ScheduleArithmetic) {
  NoiseSchedule n;
  n.base_rate = 0.3;
  EXPECT_EQ(pattern_key(FailureAxis::spatial, ActionType::click), "spatial/click");
  EXPECT_DOUBLE_EQ(n.rate("spatial/click"), 0.3);
  n.reduce("spatial/click", 0.5);
  EXPECT_DOUBLE_EQ(n.rate("spatial/click"), 0.15);
  EXPECT_DOUBLE_EQ(n.rate("none/click"), 0.3);
  n.reduce("spatial/click", 1.0);
  EXPECT_DOUBLE_EQ(n.rate("spatial/click"), 0.0);
  EXPECT_EQ(noise_from_json(encode(n)), n);
}

// ---------------------------------------------------------------------------
// Wire protocol

class Wire : public ::testing::Test {
 protected:
  const World& w = testing::shared_world();
  OracleDsBackend ds{w, {.noise = {0.1, {}}, .seed = 2}};
  OracleGpBackend gp{w};

  std::vector<DsInput> inputs(std::size_t n) {
    const ScriptedAgent agent({0.2, 0.4, 0.2, 0.2, 0.1}, 8);
    std::vector<DsInput> out;
    for (const auto& t : w.trajectories) {
      for (std::size_t i = 0; i < t.size() && out.size() < n; ++i) {
        out.push_back(input_at(t, i, agent.propose(gt_context(t, i), t.steps[i].ground_truth)));
      }
    }
    return out;
  }
};

TEST_F(Wire, RemoteMatchesLocalOnTwoHundredRequests) {
  MockRmServer server(ds, gp, {.token = "sekret"});
  server.start();
  auto client = std::make_shared<RemoteClient>(RemoteConfig{.base_url = server.url(), .token = "sekret"});
  const RemoteDsBackend rds(client);
  const RemoteGpBackend rgp(client);
  const auto in = inputs(100);
  const auto remote = parallel_map<std::pair<DsVerdict, GpVerdict>>(in.size(), 8, [&](std::size_t i) {
    const auto v = rds.ds_evaluate(in[i]);
    return std::pair(v, rgp.gp_evaluate(gp_input(in[i], v)));
  });
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto v = ds.ds_evaluate(in[i]);
    ASSERT_EQ(remote[i].first, v);
    ASSERT_EQ(remote[i].second, gp.gp_evaluate(gp_input(in[i], v)));
  }
  EXPECT_EQ(client->requests(), 200u);
  EXPECT_EQ(server.requests(), 200u);
  EXPECT_EQ(client->retries(), 0u);
}

TEST_F(Wire, RetriesInjectedServiceUnavailable) {
  MockRmServer server(ds, gp, {.fail_first = 2});
  server.start();
  auto client = std::make_shared<RemoteClient>(RemoteConfig{.base_url = server.url()});
  const auto in = inputs(1).front();
  EXPECT_EQ(RemoteDsBackend(client).ds_evaluate(in), ds.ds_evaluate(in));
  EXPECT_EQ(client->retries(), 2u);
  EXPECT_EQ(server.requests(), 3u);
}

TEST_F(Wire, GivesUpAfterBoundedRetries) {
  MockRmServer server(ds, gp, {.fail_first = 100});
  server.start();
  auto client = std::make_shared<RemoteClient>(
      RemoteConfig{.base_url = server.url(), .max_retries = 2, .backoff = std::chrono::milliseconds(1)});
  try {
    RemoteDsBackend(client).ds_evaluate(inputs(1).front());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 503);
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_TRUE(e.retryable());
  }
}

TEST_F(Wire, MalformedBodiesAre400WithAField) {
  MockRmServer server(ds, gp);
  const int port = server.start();
  httplib::Client c("127.0.0.1", port);
  auto r = c.Post(std::string(kDsPath), "{nope", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  auto body = json::parse(r->body);
  EXPECT_EQ(body["field"], "body");
  EXPECT_TRUE(body.contains("error"));

  json in = encode(inputs(1).front());
  in["context"].erase("instruction");
  r = c.Post(std::string(kDsPath), in.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["field"], "ds_input.context.instruction");

  r = c.Post(std::string(kGpPath), encode(inputs(1).front()).dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST_F(Wire, ClientSurfacesSchemaErrorsWithoutRetrying) {
  MockRmServer server(ds, gp);
  server.start();
  auto client = std::make_shared<RemoteClient>(RemoteConfig{.base_url = server.url()});
  DsInput in = inputs(1).front();
  in.context.instruction.id = "unknown-task";
  try {
    RemoteDsBackend(client).ds_evaluate(in);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_FALSE(e.retryable());
    EXPECT_EQ(e.attempts(), 1);
  }
}

TEST_F(Wire, BearerTokenIsEnforced) {
  MockRmServer server(ds, gp, {.token = "right"});
  server.start();
  auto client = std::make_shared<RemoteClient>(RemoteConfig{.base_url = server.url(), .token = "wrong"});
  try {
    RemoteDsBackend(client).ds_evaluate(inputs(1).front());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_EQ(e.field(), "Authorization");
  }
}

TEST_F(Wire, UnreachableEndpointIsARetryableBackendError) {
  int port = 0;
  {
    MockRmServer probe(ds, gp);
    port = probe.start();
  }
  auto client = std::make_shared<RemoteClient>(RemoteConfig{
      .base_url = "http://127.0.0.1:" + std::to_string(port),
      .timeout = std::chrono::milliseconds(200),
      .max_retries = 1,
      .backoff = std::chrono::milliseconds(1)});
  try {
    RemoteDsBackend(client).ds_evaluate(inputs(1).front());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 0);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(RemoteConfig, FromEnvironment) {
  ::unsetenv("RMS_BACKEND_URL");
  EXPECT_THROW(remote_config_from_env(), ConfigError);
  EXPECT_THROW(remote_config_from_env("https://example.test"), ConfigError);
  ::setenv("RMS_BACKEND_URL", "http://127.0.0.1:9", 1);
  ::setenv("RMS_BACKEND_TOKEN", "tok", 1);
  const auto c = remote_config_from_env();
  EXPECT_EQ(c.base_url, "http://127.0.0.1:9");
  EXPECT_EQ(c.token, "tok");
  EXPECT_EQ(remote_config_from_env("http://h:1").base_url, "http://h:1");
  ::unsetenv("RMS_BACKEND_URL");
  ::unsetenv("RMS_BACKEND_TOKEN");
}

}  // namespace
}  // namespace rms
