#pragma once

// Per-step protocol: the agent proposes, DS-RM judges, GP-RM arbitrates, and
// the endorsed action plus any disagreement flow into the reflux stores.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rms/agent.hpp"
#include "rms/backends.hpp"
#include "rms/world.hpp"

namespace rms {

struct Provenance {
  int round = 0;
  int episode = 0;
  /// 1-based.
  int step = 0;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

std::string to_string(const Provenance& p);

/// (context, a_star) supervision for the agent.
struct AgentRecord {
  Provenance provenance;
  StepContext context;
  Action a_star;
  Split split = Split::idd;
  /// GP rejected the DS decision and no correction existed.
  bool unresolved = false;
  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

/// A DS/GP disagreement kept for reward-model training.
struct RmsRecord {
  Provenance provenance;
  GpInput z_gp;
  GpVerdict gp;
  bool high_priority = true;
  /// pattern_key of the DS input, or "unknown/<type>" without ground truth.
  std::string pattern;
  Split split = Split::idd;
  friend bool operator==(const RmsRecord&, const RmsRecord&) = default;
};

json encode(const AgentRecord& r);
json encode(const RmsRecord& r);
void read(const json& j, const DecodeCtx& ctx, AgentRecord& out);
void read(const json& j, const DecodeCtx& ctx, RmsRecord& out);
template <> inline std::string_view record_name<AgentRecord>() { return "agent_record"; }
template <> inline std::string_view record_name<RmsRecord>() { return "rms_record"; }

/// Append-only, safe for concurrent appends. Snapshots and exports are
/// ordered by provenance, so the files do not depend on scheduling.
class RefluxStores {
 public:
  RefluxStores() = default;
  RefluxStores(const RefluxStores&) = delete;
  RefluxStores& operator=(const RefluxStores&) = delete;

  void append(AgentRecord r);
  void append(RmsRecord r);

  std::vector<AgentRecord> agent_records() const;
  std::vector<RmsRecord> rms_records() const;
  std::size_t agent_size() const;
  std::size_t rms_size() const;

  /// agent_training_set.jsonl and rms_training_set.jsonl. Throws DataError.
  void export_to(const std::filesystem::path& dir) const;

 private:
  mutable std::mutex mu_;
  std::vector<AgentRecord> agent_;
  std::vector<RmsRecord> rms_;
};

/// A backend or store failure, tagged with where it happened.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(Provenance where, const std::string& message)
      : std::runtime_error(to_string(where) + ": " + message), where_(where) {}
  const Provenance& where() const noexcept { return where_; }

 private:
  Provenance where_;
};

struct Backends {
  const DsBackend& ds;
  const GpBackend& gp;
};

struct PipelineOptions {
  /// EOK prerequisites when scoring actions against ground truth.
  bool use_eok = false;
  TextPolicy text;
  /// Score a_pred and a_star against the ground truth and compute rewards.
  bool score = true;
};

enum class StarSource { prediction, correction };

std::string_view to_string(StarSource s) noexcept;

struct StepOutcome {
  Provenance provenance;
  Split split = Split::idd;
  Action a_pred;
  DsVerdict ds;
  GpVerdict gp;
  Action a_star;
  StarSource source = StarSource::prediction;
  bool unresolved = false;
  std::optional<AgentRecord> agent_record;
  /// Present iff y_gp = 0.
  std::optional<RmsRecord> rms_record;
  /// Filled when scoring is on.
  std::optional<double> reward;
  std::optional<bool> pred_correct;
  std::optional<bool> star_correct;
};

/// Ground truth for a step, as known to the simulator.
struct StepTruth {
  const StepGroundTruth& gt;
  const EokGraph* eok = nullptr;
  Split split = Split::idd;
};

StepOutcome evaluate_step(const AgentPolicy& agent, const Backends& backends,
                          const StepContext& context, const StepTruth& truth,
                          Provenance provenance, const PipelineOptions& options = {});

/// Appends the step's agent record and, on disagreement, its RMS record.
void route_reflux(const StepOutcome& outcome, RefluxStores& stores);

struct EpisodeReport {
  Provenance provenance;  // step = 0
  std::string task_id;
  Split split = Split::idd;
  std::vector<StepOutcome> steps;
  /// e_gp on the terminal step.
  bool completed = false;

  std::size_t size() const noexcept { return steps.size(); }
  std::size_t star_correct() const;
  std::size_t pred_correct() const;
  std::size_t disagreements() const;
  std::size_t unresolved() const;
  double sr() const;
  double raw_sr() const;
};

/// Runs every step of `trajectory` in order; later steps see a_star history.
EpisodeReport run_episode(const AgentPolicy& agent, const Backends& backends, const World& world,
                          const Trajectory& trajectory, RefluxStores& stores, int round,
                          int episode, const PipelineOptions& options = {});

/// Task indices for `n` episodes: a seeded permutation of the world's tasks,
/// repeated when n exceeds the task count.
std::vector<std::size_t> select_episodes(const World& world, std::size_t n, std::uint64_t seed);

/// Episodes run concurrently; reports come back in episode order.
std::vector<EpisodeReport> run_episodes(const AgentPolicy& agent, const Backends& backends,
                                        const World& world, std::span<const std::size_t> tasks,
                                        RefluxStores& stores, int round,
                                        const PipelineOptions& options = {},
                                        std::size_t workers = 1);

json encode(const StepOutcome& o);
json encode(const EpisodeReport& r);

struct RunSummary {
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::size_t star_correct = 0;
  std::size_t pred_correct = 0;
  std::size_t disagreements = 0;
  std::size_t unresolved = 0;
  std::size_t completed = 0;
  double reward_sum = 0.0;
};

RunSummary summarize(std::span<const EpisodeReport> reports);
json encode(const RunSummary& s);

}  // namespace rms
