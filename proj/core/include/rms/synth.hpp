#pragma once

// Reward-data construction: rule-verified positives and hard negatives,
// perturbation-based easy negatives, and intention-checked OS-agent samples,
// assembled into a tier-balanced dataset.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rms/agent.hpp"
#include "rms/codec.hpp"
#include "rms/rng.hpp"
#include "rms/text.hpp"
#include "rms/validate.hpp"
#include "rms/world.hpp"

namespace rms {

// ---------------------------------------------------------------------------
// Instruction catalog

/// Groups of related instructions from the same app; members never share an
/// operational goal.
struct InstructionCatalog {
  std::vector<std::vector<TaskInstruction>> groups;

  /// One group per app.
  static InstructionCatalog from_world(const World& world);
  /// `{"groups": [["task-id", ...], ...]}`; ids resolve against `world`.
  static InstructionCatalog from_json(const json& j, const World& world);
  json to_json() const;

  const std::vector<TaskInstruction>* group_of(std::string_view task_id) const;
};

/// Unknown ids, duplicated members, and members whose ground-truth action
/// sequences coincide.
Violations validate(const InstructionCatalog& catalog, const World& world);

class NoSubstituteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws NoSubstituteError when x's group has fewer than two members or x is
/// not in the catalog.
TaskInstruction substitute_instruction(const TaskInstruction& x, const InstructionCatalog& catalog,
                                       Rng& rng);

// ---------------------------------------------------------------------------
// Trajectory stitching

/// tau1[1..k] followed by tau2[k+1..], under tau1's instruction. Throws
/// DataError when k is outside [1, len(tau1)) or the tasks coincide.
Trajectory stitch_trajectories(const Trajectory& tau1, const Trajectory& tau2, std::size_t k);

/// Cuts k whose first borrowed step differs from tau1's own step at k+1 once
/// both are reduced to templates on tau1's screen.
std::vector<std::size_t> divergent_cuts(const Trajectory& tau1, const Trajectory& tau2);

// ---------------------------------------------------------------------------
// Intention matching and grounding repair

enum class Intention { correct_intent, wrong_intent };

std::string_view to_string(Intention i) noexcept;

struct IntentionConfig {
  double snap_radius = 0.05;
  TextPolicy text;
};

Intention match_intention(const Action& a_os, const StepGroundTruth& gt, const ScreenState& screen,
                          const IntentionConfig& config = {});

/// Copy of a_os pointed at the center of the nearest valid-region box.
/// Throws DataError when a_os carries no point or no region resolves.
Action repair_grounding(const Action& a_os, const StepGroundTruth& gt, const ScreenState& screen);

struct ClassifyOptions {
  IntentionConfig intention;
  const EokGraph* eok = nullptr;
};

/// Wrong intent gives a moderate negative. Correct intent gives a positive,
/// repaired first when the grounding misses. The returned sample has an empty id.
RewardSample classify_os_action(const Action& a_os, const StepContext& context,
                                const StepGroundTruth& gt, const ClassifyOptions& options = {});

// ---------------------------------------------------------------------------
// Pools and dataset assembly

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t total_samples = 5000;
  /// positive, easy, moderate, hard.
  std::array<double, 4> tier_weights{0.534, 0.156, 0.155, 0.155};
  /// Agent draws per ground-truth step for the OS-agent and rule-verified pools.
  std::size_t candidates_per_step = 8;
  AgentErrorProfile os_profile{0.0, 0.5, 0.35, 0.0, 0.1};
  AgentErrorProfile rule_profile{0.2, 0.7, 0.0, 0.2, 0.07};
  IntentionConfig intention;
  bool use_eok = true;
  std::size_t workers = 1;
};

/// Throws ConfigError.
void check_synth_config(const SynthConfig& config);

struct EasyNegativeResult {
  std::vector<RewardSample> negatives;
  /// Ground-truth candidates in the same contexts (only those that verify).
  std::vector<RewardSample> matched_positives;
  std::size_t rejected = 0;
  /// budget minus emitted negatives, when material ran out.
  std::size_t shortfall = 0;
};

EasyNegativeResult synthesize_easy_negatives(const World& world, const InstructionCatalog& catalog,
                                             std::size_t budget, std::uint64_t seed,
                                             const SynthConfig& config = {});

struct SamplePools {
  /// Indexed by DifficultyTier.
  std::array<std::vector<RewardSample>, 4> by_tier;
  std::size_t easy_rejected = 0;
  std::size_t easy_shortfall = 0;
  json provenance = json::array();

  std::vector<RewardSample>& operator[](DifficultyTier t) {
    return by_tier[static_cast<std::size_t>(t)];
  }
  const std::vector<RewardSample>& operator[](DifficultyTier t) const {
    return by_tier[static_cast<std::size_t>(t)];
  }
};

/// Tier counts for `total` by largest remainder. Throws ConfigError on
/// negative or all-zero weights.
std::array<std::size_t, 4> tier_counts(const std::array<double, 4>& weights, std::size_t total);

SamplePools synthesize_pools(const World& world, const InstructionCatalog& catalog,
                             const SynthConfig& config);

struct DatasetManifest {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_tier;
  std::map<std::string, std::size_t> per_source;
  std::map<std::string, std::size_t> per_split;
  double positive_fraction = 0.0;
  std::uint64_t seed = 0;
  json provenance = json::array();
  std::size_t easy_rejected = 0;
  std::size_t easy_shortfall = 0;
  std::size_t train_samples = 0;
};

json encode(const DatasetManifest& m);
DatasetManifest manifest_from_json(const json& j);

/// Counts per tier, source and split for `samples`.
DatasetManifest summarize(std::span<const RewardSample> samples, std::uint64_t seed);

struct Dataset {
  /// Sorted by (source, id).
  std::vector<RewardSample> samples;
  DatasetManifest manifest;
};

/// Draws per-tier counts without replacement. Throws ConfigError listing the
/// shortfall of every tier that cannot be filled.
Dataset build_dataset(const SamplePools& pools, const std::array<double, 4>& weights,
                      std::size_t total, std::uint64_t seed);

/// In-domain samples only.
std::vector<RewardSample> training_split(std::span<const RewardSample> samples);

/// rms_dataset.jsonl, rms_train.jsonl and manifest.json under `dir`.
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Convenience: pools + build_dataset with the config's weights and total.
Dataset synthesize_dataset(const World& world, const InstructionCatalog& catalog,
                           const SynthConfig& config);

}  // namespace rms
