#pragma once

// Deterministic rule layer. Four axes, always evaluated in the order
// type -> spatial -> semantic -> prerequisite; a candidate is positive iff no
// axis fails.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rms/eok.hpp"
#include "rms/text.hpp"
#include "rms/types.hpp"

namespace rms {

enum class AxisVerdict { pass, fail, not_applicable };

std::string_view to_string(AxisVerdict v) noexcept;

struct AxisCheck {
  AxisVerdict verdict = AxisVerdict::not_applicable;
  std::string reason;
};

inline constexpr std::array<FailureAxis, 4> kRuleAxes = {
    FailureAxis::type, FailureAxis::spatial, FailureAxis::semantic, FailureAxis::prerequisite};

struct VerificationResult {
  bool passed = true;
  /// Indexed by FailureAxis (type, spatial, semantic, prerequisite).
  std::array<AxisVerdict, 4> axis_results{};
  std::optional<FailureAxis> failed_axis;
  /// Reason attached to the first failing axis; empty when passed.
  std::string reason;

  AxisVerdict axis(FailureAxis a) const { return axis_results[static_cast<std::size_t>(a)]; }
  FailureAxis failure_or_none() const { return failed_axis.value_or(FailureAxis::none); }
};

struct VerifierConfig {
  TextPolicy text;
};

AxisCheck check_type_alignment(const Action& pred, const Action& gt);

/// Throws DataError when a region id does not resolve on `screen`.
AxisCheck check_spatial_validity(const Action& pred, const ScreenState& screen,
                                 std::span<const std::string> valid_regions);

AxisCheck check_semantic_equivalence(const Action& pred, const Action& gt,
                                     TextPolicy policy = {});

/// Passes iff some EOK node matches `pred` and every ancestor of that node is
/// matched by at least one history template. Not applicable without a graph.
AxisCheck check_prerequisites(std::span<const ActionTemplate> history, const ActionTemplate& pred,
                              const EokGraph* eok);

std::vector<ActionTemplate> history_templates(std::span<const HistoryEntry> history);

VerificationResult verify(const StepContext& context, const StepGroundTruth& gt,
                          const Action& pred, const EokGraph* eok = nullptr,
                          const VerifierConfig& config = {});

}  // namespace rms
