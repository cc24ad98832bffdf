#pragma once

#include <span>
#include <string>
#include <vector>

#include "rms/eok.hpp"
#include "rms/types.hpp"

namespace rms {

/// Each function returns one human-readable line per broken invariant, naming
/// the field and the rule. An empty result means the value is well-formed.
using Violations = std::vector<std::string>;

Violations validate(const Point& p);
Violations validate(const UiElement& e);
Violations validate(const ScreenState& s);
Violations validate(const TaskInstruction& t);
Violations validate(const Action& a);
Violations validate(const StepGroundTruth& gt);
/// Also checks that every valid region resolves on `screen`.
Violations validate(const StepGroundTruth& gt, const ScreenState& screen);
Violations validate(const StepContext& c);
Violations validate(const Trajectory& t);
Violations validate(const RewardSample& s);
Violations validate(const EokGraph& g);

/// Corpus-level: instruction ids must be unique.
Violations validate_unique_ids(std::span<const TaskInstruction> tasks);

}  // namespace rms
