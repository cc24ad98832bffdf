#include "rms/enumerate.hpp"

#include <cmath>

namespace rms {

ValidActionSet enumerate_valid_actions(const ScreenState& screen, const StepGroundTruth& gt,
                                       double step, TextPolicy policy) {
  ValidActionSet out;
  out.type = gt.a_gt.type();
  out.step = step;
  out.policy = policy;
  std::vector<Box> boxes;
  for (const auto& id : gt.valid_regions) {
    const UiElement* e = screen.find(id);
    if (e == nullptr) throw DataError("valid region '" + id + "' not found");
    boxes.push_back(e->box);
  }
  if (const auto* in = gt.a_gt.get_if<act::InputText>()) out.text = normalize_text(in->text, policy);
  if (const auto* op = gt.a_gt.get_if<act::OpenApp>()) out.text = normalize_text(op->name, policy);
  if (const auto* sw = gt.a_gt.get_if<act::Swipe>()) out.direction = sw->direction;

  switch (out.type) {
    case ActionType::click:
    case ActionType::long_press:
    case ActionType::swipe:
    case ActionType::input_text:
      out.spatial = true;
      break;
    default:
      break;
  }
  if (!out.spatial) return out;

  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Point p{i * step, j * step};
      for (const auto& b : boxes) {
        if (b.contains(p)) {
          out.cells.emplace(i, j);
          break;
        }
      }
    }
  }
  return out;
}

bool ValidActionSet::contains(const Action& a) const {
  if (a.type() != type) return false;
  if (text) {
    const std::string* t = nullptr;
    if (const auto* in = a.get_if<act::InputText>()) t = &in->text;
    if (const auto* op = a.get_if<act::OpenApp>()) t = &op->name;
    if (t == nullptr || normalize_text(*t, policy) != *text) return false;
  }
  if (direction) {
    const auto* sw = a.get_if<act::Swipe>();
    if (sw == nullptr || sw->direction != *direction) return false;
  }
  const auto p = a.point();
  if (!p) return true;
  if (!spatial) return true;
  const std::pair<int, int> cell{static_cast<int>(std::lround(p->u / step)),
                                 static_cast<int>(std::lround(p->v / step))};
  return cells.count(cell) > 0;
}

std::vector<Point> ValidActionSet::points() const {
  std::vector<Point> out;
  out.reserve(cells.size());
  for (const auto& [i, j] : cells) out.push_back({i * step, j * step});
  return out;
}

}  // namespace rms
