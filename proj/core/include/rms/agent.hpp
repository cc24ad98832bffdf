#pragma once

// Scripted fallible agent standing in for the GUI policy. Error axes fire
// independently, in the order intent -> type -> grounding -> semantic.

#include <cstdint>

#include "rms/rng.hpp"
#include "rms/types.hpp"

namespace rms {

struct AgentErrorProfile {
  double p_type_error = 0.0;
  double p_grounding_offset = 0.0;
  double p_intent_error = 0.0;
  double p_semantic_error = 0.0;
  double grounding_offset_scale = 0.1;
  friend bool operator==(const AgentErrorProfile&, const AgentErrorProfile&) = default;
};

/// Throws ConfigError when a probability leaves [0,1] or the scale is not in (0, 1].
void check_profile(const AgentErrorProfile& p);

/// Intent errors aim at elements whose center is farther than this from
/// every valid box.
inline constexpr double kIntentClearance = 0.1;

Action scripted_agent_act(const AgentErrorProfile& profile, const StepContext& context,
                          const StepGroundTruth& gt, Rng& rng);

/// Proposal source used by the pipeline.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual Action propose(const StepContext& context, const StepGroundTruth& gt) const = 0;
};

/// Draws are keyed on (seed, task id, step index): the same context always
/// gets the same proposal, whatever the history or round.
class ScriptedAgent : public AgentPolicy {
 public:
  ScriptedAgent(AgentErrorProfile profile, std::uint64_t seed)
      : profile_(profile), seed_(seed) {}

  Action propose(const StepContext& context, const StepGroundTruth& gt) const override;
  const AgentErrorProfile& profile() const noexcept { return profile_; }

 private:
  AgentErrorProfile profile_;
  std::uint64_t seed_;
};

}  // namespace rms
