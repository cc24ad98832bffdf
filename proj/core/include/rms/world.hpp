#pragma once

// Synthetic app worlds: a shared launcher, one home screen per app, and a
// ground-truth trajectory per task. Generation is a pure function of the WorldSpec.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rms/codec.hpp"
#include "rms/eok.hpp"
#include "rms/types.hpp"
#include "rms/validate.hpp"

namespace rms {

struct IntRange {
  int min = 0;
  int max = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct WorldSpec {
  std::uint64_t seed = 0;
  int n_apps = 20;
  int n_tasks_per_app = 10;
  IntRange steps_distribution{3, 5};
  /// Interactive elements per task screen (the root panel is extra).
  IntRange elements_per_screen{4, 8};
  double ood_app_fraction = 0.3;
  friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

/// Throws ConfigError naming the offending field.
void check_spec(const WorldSpec& spec);
std::size_t ood_app_count(const WorldSpec& spec);

json encode(const WorldSpec& spec);
/// Missing keys keep their defaults. Throws ConfigError.
WorldSpec world_spec_from_json(const json& j, bool strict = true);

struct AppInfo {
  std::string name;
  Split split = Split::idd;
  friend bool operator==(const AppInfo&, const AppInfo&) = default;
};

/// Resolved ground truth for one (task, step).
struct StepRef {
  const Trajectory* trajectory = nullptr;
  std::size_t index = 0;  // 0-based
  const EokGraph* eok = nullptr;
  Split split = Split::idd;

  const TrajectoryStep& step() const { return trajectory->steps[index]; }
  const StepGroundTruth& ground_truth() const { return step().ground_truth; }
};

class World {
 public:
  WorldSpec spec;
  std::vector<AppInfo> apps;
  /// Aligned: trajectories[i] and eok[i] belong to tasks[i].
  std::vector<TaskInstruction> tasks;
  std::vector<Trajectory> trajectories;
  std::vector<EokGraph> eok;

  /// Must be called after the vectors above are filled or modified.
  void build_index();

  Split split_of_app(std::string_view app) const;
  std::size_t task_index(std::string_view task_id) const;  // throws DataError
  const EokGraph& eok_for(std::string_view task_id) const;
  /// step_index is 1-based. Throws DataError when absent.
  StepRef lookup(std::string_view task_id, int step_index) const;

  friend bool operator==(const World& a, const World& b) {
    return a.spec == b.spec && a.apps == b.apps && a.tasks == b.tasks &&
           a.trajectories == b.trajectories && a.eok == b.eok;
  }

 private:
  std::unordered_map<std::string, std::size_t> task_pos_;
  std::unordered_map<std::string, Split> app_split_;
};

World generate_world(const WorldSpec& spec);

/// Ground-truth history h_{1:i} of a trajectory (entries for steps 0..i-1).
std::vector<HistoryEntry> gt_history(const Trajectory& t, std::size_t i);

HistoryEntry history_entry(const ScreenState& screen, const Action& action);

/// Context for step i (0-based) with the given history.
StepContext make_context(const Trajectory& t, std::size_t i, std::vector<HistoryEntry> history);
inline StepContext gt_context(const Trajectory& t, std::size_t i) {
  return make_context(t, i, gt_history(t, i));
}

/// world.json, tasks.jsonl, screens.jsonl, trajectories.jsonl, eok.jsonl.
void export_world(const World& world, const std::filesystem::path& dir);
World import_world(const std::filesystem::path& dir, DecodeOptions opts = {});

/// Every record, unique task ids, and every ground-truth action passing its
/// own rules (with EOK). Each message is prefixed with the task id.
Violations validate(const World& world);

/// Only IDD apps' tasks.
std::vector<TaskInstruction> training_tasks(const World& world);

}  // namespace rms
