#include "rms/verifier.hpp"

#include <sstream>

namespace rms {

std::string_view to_string(AxisVerdict v) noexcept {
  switch (v) {
    case AxisVerdict::pass: return "pass";
    case AxisVerdict::fail: return "fail";
    case AxisVerdict::not_applicable: return "not_applicable";
  }
  return "not_applicable";
}

AxisCheck check_type_alignment(const Action& pred, const Action& gt) {
  if (pred.type() == gt.type()) return {AxisVerdict::pass, {}};
  std::ostringstream os;
  os << "action type " << to_string(pred.type()) << " does not match expected "
     << to_string(gt.type());
  return {AxisVerdict::fail, os.str()};
}

AxisCheck check_spatial_validity(const Action& pred, const ScreenState& screen,
                                 std::span<const std::string> valid_regions) {
  std::vector<const UiElement*> regions;
  regions.reserve(valid_regions.size());
  for (const auto& id : valid_regions) {
    const UiElement* e = screen.find(id);
    if (e == nullptr) {
      throw DataError("valid region '" + id + "' not found on screen '" + screen.screen_id + "'");
    }
    regions.push_back(e);
  }
  const auto p = pred.point();
  if (!p) return {AxisVerdict::not_applicable, {}};
  for (const UiElement* e : regions) {
    if (e->box.contains(*p)) return {AxisVerdict::pass, {}};
  }
  std::ostringstream os;
  os << "point (" << p->u << ", " << p->v << ") lies outside every valid region";
  return {AxisVerdict::fail, os.str()};
}

AxisCheck check_semantic_equivalence(const Action& pred, const Action& gt, TextPolicy policy) {
  if (pred.type() != gt.type()) return {AxisVerdict::not_applicable, {}};
  if (const auto* p = pred.get_if<act::InputText>()) {
    const auto& g = *gt.get_if<act::InputText>();
    if (texts_equivalent(p->text, g.text, policy)) return {AxisVerdict::pass, {}};
    return {AxisVerdict::fail, "input text '" + p->text + "' differs from '" + g.text + "'"};
  }
  if (const auto* p = pred.get_if<act::Swipe>()) {
    const auto& g = *gt.get_if<act::Swipe>();
    if (p->direction == g.direction) return {AxisVerdict::pass, {}};
    return {AxisVerdict::fail, "swipe direction " + std::string(to_string(p->direction)) +
                                   " differs from " + std::string(to_string(g.direction))};
  }
  if (const auto* p = pred.get_if<act::OpenApp>()) {
    const auto& g = *gt.get_if<act::OpenApp>();
    if (texts_equivalent(p->name, g.name, policy)) return {AxisVerdict::pass, {}};
    return {AxisVerdict::fail, "app '" + p->name + "' differs from '" + g.name + "'"};
  }
  return {AxisVerdict::not_applicable, {}};
}

AxisCheck check_prerequisites(std::span<const ActionTemplate> history, const ActionTemplate& pred,
                              const EokGraph* eok) {
  if (eok == nullptr) return {AxisVerdict::not_applicable, {}};
  bool any_match = false;
  std::string unmet;
  for (std::size_t i = 0; i < eok->nodes.size(); ++i) {
    if (!template_matches(eok->nodes[i], pred)) continue;
    any_match = true;
    bool satisfied = true;
    for (std::size_t a : eok->ancestors(i)) {
      bool seen = false;
      for (const auto& h : history) {
        if (template_matches(eok->nodes[a], h)) {
          seen = true;
          break;
        }
      }
      if (!seen) {
        satisfied = false;
        if (unmet.empty()) unmet = eok->nodes[a].id;
        break;
      }
    }
    if (satisfied) return {AxisVerdict::pass, {}};
  }
  if (!any_match) return {AxisVerdict::fail, "off-path action"};
  return {AxisVerdict::fail, "unmet prerequisite '" + unmet + "'"};
}

std::vector<ActionTemplate> history_templates(std::span<const HistoryEntry> history) {
  std::vector<ActionTemplate> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back({h.action.type(), h.target});
  return out;
}

VerificationResult verify(const StepContext& context, const StepGroundTruth& gt,
                          const Action& pred, const EokGraph* eok, const VerifierConfig& config) {
  std::array<AxisCheck, 4> checks;
  checks[0] = check_type_alignment(pred, gt.a_gt);
  checks[1] = check_spatial_validity(pred, context.screen, gt.valid_regions);
  if (checks[0].verdict == AxisVerdict::pass) {
    checks[2] = check_semantic_equivalence(pred, gt.a_gt, config.text);
  }
  if (eok != nullptr) {
    const auto hist = history_templates(context.history);
    checks[3] = check_prerequisites(hist, describe_action(pred, context.screen), eok);
  }

  VerificationResult r;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    r.axis_results[i] = checks[i].verdict;
    if (checks[i].verdict == AxisVerdict::fail && !r.failed_axis) {
      r.passed = false;
      r.failed_axis = kRuleAxes[i];
      r.reason = checks[i].reason;
    }
  }
  return r;
}

}  // namespace rms
