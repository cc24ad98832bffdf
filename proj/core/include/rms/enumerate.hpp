#pragma once

// Brute-force oracle: every action that passes the rule axes for a step,
// reduced to equivalence classes over a fixed lattice.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rms/text.hpp"
#include "rms/types.hpp"

namespace rms {

inline constexpr double kLatticeStep = 0.005;

struct ValidActionSet {
  ActionType type = ActionType::wait;
  /// Lattice cells (i, j) with (i*step, j*step) inside some valid box. Empty
  /// for point-free ground truth.
  std::set<std::pair<int, int>> cells;
  bool spatial = false;
  /// Normalized text (InputText), normalized name (OpenApp).
  std::optional<std::string> text;
  std::optional<Direction> direction;
  double step = kLatticeStep;
  TextPolicy policy;

  /// Membership with the candidate's point snapped to the nearest lattice
  /// cell. Point-free candidates skip the spatial test.
  bool contains(const Action& a) const;
  std::vector<Point> points() const;
};

/// Throws DataError when a valid region does not resolve on `screen`.
ValidActionSet enumerate_valid_actions(const ScreenState& screen, const StepGroundTruth& gt,
                                       double step = kLatticeStep, TextPolicy policy = {});

}  // namespace rms
