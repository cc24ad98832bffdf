#include "rms/agent.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace rms {

namespace {

constexpr std::string_view kTextBank[] = {"Tokyo", "black coffee", "monthly budget",
                                         "red umbrella", "night walk", "veggie burger"};

double min_distance_to_valid(const ScreenState& screen, const StepGroundTruth& gt, Point p) {
  double best = INFINITY;
  for (const auto& id : gt.valid_regions) {
    if (const UiElement* e = screen.find(id)) best = std::min(best, e->box.distance_to(p));
  }
  return best;
}

/// Interactive elements well clear of every valid region. Point-free ground
/// truth only names a region as a formality, so any element will do.
std::vector<const UiElement*> intent_targets(const ScreenState& screen, const StepGroundTruth& gt) {
  const bool spatial = gt.a_gt.point().has_value();
  std::vector<const UiElement*> out;
  for (const auto& e : screen.elements) {
    if (!e.interactive) continue;
    if (spatial && min_distance_to_valid(screen, gt, e.box.center()) <= kIntentClearance) continue;
    out.push_back(&e);
  }
  return out;
}

Action apply_intent_error(const Action& a, const ScreenState& screen, const StepGroundTruth& gt,
                          Rng& rng) {
  if (const auto* open = a.get_if<act::OpenApp>()) {
    std::vector<const std::string*> names;
    for (const auto& e : screen.elements) {
      if (e.interactive && e.text && *e.text != open->name) names.push_back(&*e.text);
    }
    if (names.empty()) return a;
    return Action::open_app(*names[rng.index(names.size())]);
  }
  const auto targets = intent_targets(screen, gt);
  if (targets.empty()) return a;
  const Point c = targets[rng.index(targets.size())]->box.center();
  if (a.point()) return a.with_point(c);
  if (a.type() == ActionType::swipe || a.type() == ActionType::input_text) return a.with_point(c);
  return Action::click(c.u, c.v);
}

Action apply_type_error(const Action& a, Rng& rng) {
  static constexpr ActionType kChoices[] = {ActionType::click, ActionType::long_press,
                                            ActionType::swipe, ActionType::input_text,
                                            ActionType::back,  ActionType::home,
                                            ActionType::wait};
  std::vector<ActionType> options;
  for (auto t : kChoices) {
    if (t != a.type()) options.push_back(t);
  }
  const ActionType t = options[rng.index(options.size())];
  const Point p = a.point().value_or(Point{0.5, 0.5});
  switch (t) {
    case ActionType::click: return Action::click(p.u, p.v);
    case ActionType::long_press: return Action::long_press(p.u, p.v);
    case ActionType::swipe: return Action::swipe(static_cast<Direction>(rng.index(4)), p);
    case ActionType::input_text:
      return Action::input_text(std::string(kTextBank[rng.index(std::size(kTextBank))]), p);
    case ActionType::back: return Action::back();
    case ActionType::home: return Action::home();
    default: return Action::wait();
  }
}

Action apply_grounding_offset(const Action& a, double scale, Rng& rng) {
  const auto p = a.point();
  if (!p) return a;
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point q{p->u + scale * std::cos(theta), p->v + scale * std::sin(theta)};
    if (q.u >= 0.0 && q.u <= 1.0 && q.v >= 0.0 && q.v <= 1.0) return a.with_point(q);
  }
  return a;
}

Action apply_semantic_error(const Action& a, Rng& rng) {
  if (const auto* in = a.get_if<act::InputText>()) {
    std::vector<std::string_view> options;
    for (auto s : kTextBank) {
      if (s != in->text) options.emplace_back(s);
    }
    return act::InputText{std::string(options[rng.index(options.size())]), in->target};
  }
  if (const auto* sw = a.get_if<act::Swipe>()) {
    return act::Swipe{opposite(sw->direction), sw->start};
  }
  return a;
}

}  // namespace

void check_profile(const AgentErrorProfile& p) {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + ": must be in [0, 1]");
  };
  prob(p.p_type_error, "p_type_error");
  prob(p.p_grounding_offset, "p_grounding_offset");
  prob(p.p_intent_error, "p_intent_error");
  prob(p.p_semantic_error, "p_semantic_error");
  if (!(p.grounding_offset_scale > 0.0 && p.grounding_offset_scale <= 1.0)) {
    throw ConfigError("grounding_offset_scale: must be in (0, 1]");
  }
}

Action scripted_agent_act(const AgentErrorProfile& profile, const StepContext& context,
                          const StepGroundTruth& gt, Rng& rng) {
  // Every gate is drawn up front so that enabling one axis never shifts
  // another axis' stream.
  const double u_intent = rng.uniform();
  const double u_type = rng.uniform();
  const double u_ground = rng.uniform();
  const double u_sem = rng.uniform();
  Rng r_intent(rng.next());
  Rng r_type(rng.next());
  Rng r_ground(rng.next());
  Rng r_sem(rng.next());

  Action a = gt.a_gt;
  if (u_intent < profile.p_intent_error) a = apply_intent_error(a, context.screen, gt, r_intent);
  if (u_type < profile.p_type_error) a = apply_type_error(a, r_type);
  if (u_ground < profile.p_grounding_offset) {
    a = apply_grounding_offset(a, profile.grounding_offset_scale, r_ground);
  }
  if (u_sem < profile.p_semantic_error) a = apply_semantic_error(a, r_sem);
  return a;
}

Action ScriptedAgent::propose(const StepContext& context, const StepGroundTruth& gt) const {
  Rng rng(KeyHasher(seed_)
              .add("agent")
              .add(context.instruction.id)
              .add(static_cast<std::uint64_t>(context.step_index))
              .value());
  return scripted_agent_act(profile_, context, gt, rng);
}

}  // namespace rms
