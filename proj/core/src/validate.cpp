#include "rms/validate.hpp"

#include <set>

namespace rms {
namespace {

void prefixed(Violations& out, const std::string& prefix, const Violations& inner) {
  for (const auto& v : inner) out.push_back(prefix + v);
}

bool unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

Violations validate(const Point& p) {
  Violations v;
  if (!unit(p.u) || !unit(p.v)) v.emplace_back("point: coordinates outside [0,1]");
  return v;
}

Violations validate(const UiElement& e) {
  Violations v;
  if (e.element_id.empty()) v.emplace_back("element_id: empty");
  const Box& b = e.box;
  if (b.x0 >= b.x1) v.emplace_back("box: x0 ≥ x1");
  if (b.y0 >= b.y1) v.emplace_back("box: y0 ≥ y1");
  if (!unit(b.x0) || !unit(b.y0) || !unit(b.x1) || !unit(b.y1)) {
    v.emplace_back("box: coordinates outside [0,1]");
  }
  return v;
}

Violations validate(const ScreenState& s) {
  Violations v;
  if (s.screen_id.empty()) v.emplace_back("screen_id: empty");
  if (s.width_px <= 0) v.emplace_back("width_px: must be positive");
  if (s.height_px <= 0) v.emplace_back("height_px: must be positive");
  if (s.elements.empty()) v.emplace_back("elements: at least one element required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    const auto& e = s.elements[i];
    prefixed(v, "elements[" + std::to_string(i) + "].", validate(e));
    if (!ids.insert(e.element_id).second) {
      v.push_back("elements: duplicate element_id '" + e.element_id + "'");
    }
  }
  return v;
}

Violations validate(const TaskInstruction& t) {
  Violations v;
  if (t.id.empty()) v.emplace_back("id: empty");
  if (t.text.empty()) v.emplace_back("text: empty");
  if (t.app.empty()) v.emplace_back("app: empty");
  return v;
}

Violations validate(const Action& a) {
  Violations v;
  if (auto p = a.point()) prefixed(v, "action.", validate(*p));
  if (const auto* in = a.get_if<act::InputText>(); in && in->text.empty()) {
    v.emplace_back("action.text: empty");
  }
  if (const auto* open = a.get_if<act::OpenApp>(); open && open->name.empty()) {
    v.emplace_back("action.name: empty");
  }
  return v;
}

Violations validate(const StepGroundTruth& gt) {
  Violations v;
  prefixed(v, "a_gt.", validate(gt.a_gt));
  if (gt.valid_regions.empty()) v.emplace_back("valid_regions: empty");
  if (gt.terminal != (gt.a_gt.type() == ActionType::complete)) {
    v.emplace_back("terminal: must be true exactly when a_gt is complete");
  }
  return v;
}

Violations validate(const StepGroundTruth& gt, const ScreenState& screen) {
  Violations v = validate(gt);
  for (const auto& id : gt.valid_regions) {
    if (screen.find(id) == nullptr) {
      v.push_back("valid_regions: '" + id + "' not on screen '" + screen.screen_id + "'");
    }
  }
  return v;
}

Violations validate(const StepContext& c) {
  Violations v;
  prefixed(v, "instruction.", validate(c.instruction));
  prefixed(v, "screen.", validate(c.screen));
  if (c.step_index < 1) v.emplace_back("step_index: must be ≥ 1");
  if (static_cast<long>(c.history.size()) != static_cast<long>(c.step_index) - 1) {
    v.emplace_back("history: length must equal step_index − 1");
  }
  for (std::size_t i = 0; i < c.history.size(); ++i) {
    prefixed(v, "history[" + std::to_string(i) + "].", validate(c.history[i].action));
  }
  return v;
}

Violations validate(const Trajectory& t) {
  Violations v;
  prefixed(v, "task.", validate(t.task));
  if (t.steps.empty()) v.emplace_back("steps: empty");
  if (t.task.app != t.app) v.emplace_back("app: differs from task.app");
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const std::string at = "steps[" + std::to_string(i) + "].";
    prefixed(v, at + "screen.", validate(t.steps[i].screen));
    prefixed(v, at + "ground_truth.",
             validate(t.steps[i].ground_truth, t.steps[i].screen));
    if (t.steps[i].ground_truth.terminal && i + 1 != t.steps.size()) {
      v.push_back(at + "ground_truth.terminal: only the last step may be terminal");
    }
  }
  return v;
}

Violations validate(const RewardSample& s) {
  Violations v;
  if (s.id.empty()) v.emplace_back("id: empty");
  prefixed(v, "context.", validate(s.context));
  prefixed(v, "candidate.", validate(s.candidate));
  if (s.label != (s.tier == DifficultyTier::positive)) v.emplace_back("label/tier inconsistent");
  const FailureAxis axis = s.failure_axis.value_or(FailureAxis::none);
  if (s.label != (axis == FailureAxis::none)) v.emplace_back("label/failure_axis inconsistent");
  return v;
}

Violations validate(const EokGraph& g) {
  Violations v;
  if (g.pattern_id.empty()) v.emplace_back("pattern_id: empty");
  std::set<std::string> ids;
  for (const auto& n : g.nodes) {
    if (n.id.empty()) v.emplace_back("nodes: empty id");
    if (!ids.insert(n.id).second) v.push_back("nodes: duplicate id '" + n.id + "'");
  }
  bool dangling = false;
  for (const auto& [from, to] : g.edges) {
    if (!ids.contains(from) || !ids.contains(to)) {
      v.push_back("edges: (" + from + ", " + to + ") references an unknown node");
      dangling = true;
    }
  }
  if (!dangling) {
    if (auto c = g.find_cycle()) v.push_back("edges: cycle through '" + *c + "'");
  }
  return v;
}

Violations validate_unique_ids(std::span<const TaskInstruction> tasks) {
  Violations v;
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    if (!ids.insert(t.id).second) v.push_back("id: duplicate '" + t.id + "'");
  }
  return v;
}

}  // namespace rms
