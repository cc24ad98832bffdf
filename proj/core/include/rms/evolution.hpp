#pragma once

// Multi-round self-evolution. Retraining is simulated: the agent replays
// endorsed actions on contexts it has seen, and DS-RM's per-pattern noise
// shrinks for every pattern that produced a disagreement.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rms/agent.hpp"
#include "rms/backends.hpp"
#include "rms/metrics.hpp"
#include "rms/pipeline.hpp"
#include "rms/world.hpp"

namespace rms {

/// "task|step|screen_id"
std::string context_fingerprint(const StepContext& context);

struct LearnerState {
  AgentErrorProfile base_profile;
  std::uint64_t agent_seed = 0;
  std::map<std::string, Action> policy;
  NoiseSchedule ds_noise;
};

/// Replays the table on known contexts, otherwise defers to the scripted base.
class TablePolicy : public AgentPolicy {
 public:
  explicit TablePolicy(const LearnerState& state)
      : table_(state.policy), base_(state.base_profile, state.agent_seed) {}
  Action propose(const StepContext& context, const StepGroundTruth& gt) const override;

 private:
  const std::map<std::string, Action>& table_;
  ScriptedAgent base_;
};

/// Installs every in-domain, resolved record; later records overwrite earlier.
LearnerState apply_agent_reflux(LearnerState state, std::span<const AgentRecord> records);

/// Every distinct in-domain pattern in `records` has its rate multiplied by
/// (1 - factor), once per call. Throws ConfigError unless factor is in (0, 1].
LearnerState apply_rms_reflux(LearnerState state, std::span<const RmsRecord> records,
                              double factor);

/// Percentages with the counts behind them; ALL is pooled from IDD and OOD.
struct SplitMetric {
  std::size_t idd_correct = 0;
  std::size_t idd_total = 0;
  std::size_t ood_correct = 0;
  std::size_t ood_total = 0;

  void add(Split s, bool correct);
  double all() const;
  double idd() const;
  double ood() const;
  std::size_t n() const noexcept { return idd_total + ood_total; }
};

struct RoundReport {
  int round = 0;
  /// Raw step SR of the agent's proposals.
  SplitMetric agent_sr;
  /// DS-RM accuracy on the run's fixed discrimination benchmark.
  SplitMetric ds_acc;
  /// Step SR of the endorsed actions.
  SplitMetric endorsed_sr;
  std::size_t agent_reflux = 0;
  std::size_t rms_reflux = 0;
  std::size_t disagreements = 0;
  std::size_t unresolved = 0;
  std::size_t policy_size = 0;
};

struct EvolutionConfig {
  std::uint64_t seed = 0;
  int rounds = 3;
  std::size_t episodes_per_round = 200;
  /// Same episodes every round; otherwise each round draws its own.
  bool revisit = true;
  AgentErrorProfile agent_profile{0.05, 0.2, 0.05, 0.05, 0.1};
  double ds_noise = 0.25;
  double gp_noise = 0.0;
  double reduction_factor = 0.5;
  bool use_eok = false;
  std::size_t workers = 1;
};

/// Throws ConfigError.
void check_evolution_config(const EvolutionConfig& config);

LearnerState initial_state(const EvolutionConfig& config);

/// One (context, action, truth) item of the DS benchmark.
struct DiscriminationItem {
  DsInput input;
  bool label = false;
  Split split = Split::idd;
};

/// Ground-truth context of every step of `tasks`, paired once with a_gt and
/// once with the base agent's proposal.
std::vector<DiscriminationItem> discrimination_benchmark(const World& world,
                                                         std::span<const std::size_t> tasks,
                                                         const LearnerState& state, bool use_eok);

SplitMetric ds_accuracy(const DsBackend& ds, std::span<const DiscriminationItem> items,
                        std::size_t workers = 1);

struct EvolutionResult {
  std::vector<RoundReport> rounds;
  LearnerState final_state;
};

/// Rounds run in order 0..rounds-1; round r is measured after r reflux updates.
/// `gp` overrides the oracle GP-RM built from the config.
EvolutionResult simulate_evolution(const World& world, const EvolutionConfig& config,
                                   const GpBackend* gp = nullptr);

json encode(const EvolutionConfig& c);
EvolutionConfig evolution_config_from_json(const json& j);
json encode(const RoundReport& r);
/// Agent StepSR and DS-RM DiscAcc rows, one group per round.
std::vector<MetricRow> round_rows(std::span<const RoundReport> rounds);

/// {"config", "rounds", "rows", "no_data"}; the rows make it a report document.
json evolution_report(const EvolutionConfig& config, std::span<const RoundReport> rounds);
std::string evolution_csv(std::span<const RoundReport> rounds);

/// evolution_report.json and evolution_report.csv.
void export_evolution(const std::filesystem::path& dir, const EvolutionConfig& config,
                      std::span<const RoundReport> rounds);

}  // namespace rms
