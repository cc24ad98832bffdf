#pragma once

// Explicit operational knowledge: a prerequisite DAG over abstract action
// templates (action type + target descriptor). Templates never carry
// coordinates; a concrete action is reduced to a template by resolving its
// point to the element it lands on.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rms/types.hpp"

namespace rms {

/// Matches any target.
inline constexpr std::string_view kAnyTarget = "*";

struct EokNode {
  std::string id;
  ActionType action_type = ActionType::click;
  std::string target_descriptor;
  friend bool operator==(const EokNode&, const EokNode&) = default;
};

struct EokGraph {
  std::string pattern_id;
  std::vector<EokNode> nodes;
  /// (prerequisite, dependent) id pairs.
  std::vector<std::pair<std::string, std::string>> edges;

  std::optional<std::size_t> index_of(std::string_view node_id) const noexcept;
  /// Indices of all transitive prerequisites of `node`, ascending.
  std::vector<std::size_t> ancestors(std::size_t node) const;
  /// Empty when acyclic; otherwise a description of one offending node.
  std::optional<std::string> find_cycle() const;

  friend bool operator==(const EokGraph&, const EokGraph&) = default;
};

struct ActionTemplate {
  ActionType type = ActionType::click;
  std::string target;
  friend bool operator==(const ActionTemplate&, const ActionTemplate&) = default;
};

/// Reduce an action to its template on `screen`. Point actions resolve to the
/// normalized text of the smallest element containing the point (or its role
/// when it has no text); OpenApp resolves to the normalized app name.
ActionTemplate describe_action(const Action& action, const ScreenState& screen);

bool template_matches(const EokNode& node, const ActionTemplate& t);

}  // namespace rms
