#include "rms/eok.hpp"

#include <algorithm>
#include <functional>

#include "rms/text.hpp"

namespace rms {

std::optional<std::size_t> EokGraph::index_of(std::string_view node_id) const noexcept {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == node_id) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> EokGraph::ancestors(std::size_t node) const {
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    for (const auto& [from, to] : edges) {
      if (nodes[cur].id != to) continue;
      auto idx = index_of(from);
      if (idx && !seen[*idx]) {
        seen[*idx] = true;
        stack.push_back(*idx);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] && i != node) out.push_back(i);
  }
  return out;
}

std::optional<std::string> EokGraph::find_cycle() const {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(nodes.size(), 0);
  std::optional<std::string> cycle;
  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    state[i] = 1;
    for (const auto& [from, to] : edges) {
      if (cycle || from != nodes[i].id) continue;
      auto j = index_of(to);
      if (!j) continue;
      if (state[*j] == 1) {
        cycle = nodes[*j].id;
      } else if (state[*j] == 0) {
        dfs(*j);
      }
    }
    state[i] = 2;
  };
  for (std::size_t i = 0; i < nodes.size() && !cycle; ++i) {
    if (state[i] == 0) dfs(i);
  }
  return cycle;
}

ActionTemplate describe_action(const Action& action, const ScreenState& screen) {
  ActionTemplate t{action.type(), {}};
  if (const auto* open = action.get_if<act::OpenApp>()) {
    t.target = normalize_text(open->name);
    return t;
  }
  const auto p = action.point();
  if (!p) return t;
  const UiElement* best = nullptr;
  for (const auto& e : screen.elements) {
    if (!e.box.contains(*p)) continue;
    if (best == nullptr || e.box.area() < best->box.area()) best = &e;
  }
  if (best != nullptr) {
    t.target = best->text ? normalize_text(*best->text) : std::string(to_string(best->role));
  }
  return t;
}

bool template_matches(const EokNode& node, const ActionTemplate& t) {
  if (node.action_type != t.type) return false;
  if (node.target_descriptor == kAnyTarget) return true;
  return normalize_text(node.target_descriptor) == t.target;
}

}  // namespace rms
