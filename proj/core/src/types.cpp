#include "rms/types.hpp"

#include <algorithm>
#include <cmath>

namespace rms {

double Box::distance_to(Point p) const noexcept {
  const double dx = std::max({x0 - p.u, 0.0, p.u - x1});
  const double dy = std::max({y0 - p.v, 0.0, p.v - y1});
  return std::hypot(dx, dy);
}

const UiElement* ScreenState::find(std::string_view element_id) const noexcept {
  for (const auto& e : elements) {
    if (e.element_id == element_id) return &e;
  }
  return nullptr;
}

std::optional<Point> Action::point() const noexcept {
  return std::visit(
      [](const auto& a) -> std::optional<Point> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, act::Click> || std::is_same_v<T, act::LongPress>) {
          return a.point;
        } else if constexpr (std::is_same_v<T, act::Swipe>) {
          return a.start;
        } else if constexpr (std::is_same_v<T, act::InputText>) {
          return a.target;
        } else {
          return std::nullopt;
        }
      },
      v_);
}

Action Action::with_point(Point p) const {
  Action copy = *this;
  std::visit(
      [p](auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, act::Click> || std::is_same_v<T, act::LongPress>) {
          a.point = p;
        } else if constexpr (std::is_same_v<T, act::Swipe>) {
          a.start = p;
        } else if constexpr (std::is_same_v<T, act::InputText>) {
          a.target = p;
        }
      },
      copy.v_);
  return copy;
}

Direction opposite(Direction d) noexcept {
  switch (d) {
    case Direction::up: return Direction::down;
    case Direction::down: return Direction::up;
    case Direction::left: return Direction::right;
    case Direction::right: return Direction::left;
  }
  return d;
}

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 6> kRoleNames = {"button", "text_field", "list_item",
                                                        "icon",   "panel",      "other"};
constexpr std::array<std::string_view, 2> kLevelNames = {"high", "low"};
constexpr std::array<std::string_view, 4> kDirectionNames = {"up", "down", "left", "right"};
constexpr std::array<std::string_view, kActionTypeCount> kActionNames = {
    "click", "long_press", "swipe",    "input_text", "open_app",
    "back",  "home",       "wait",     "complete",   "impossible"};
constexpr std::array<std::string_view, 4> kTierNames = {"positive", "easy_negative",
                                                        "moderate_negative", "hard_negative"};
constexpr std::array<std::string_view, 5> kSourceNames = {
    "rule_verified", "instruction_substitution", "trajectory_stitching",
    "os_agent_intent_error", "os_agent_repaired"};
constexpr std::array<std::string_view, 2> kSplitNames = {"idd", "ood"};
constexpr std::array<std::string_view, 5> kAxisNames = {"type", "spatial", "semantic",
                                                        "prerequisite", "none"};

}  // namespace

std::string_view to_string(Role r) noexcept { return kRoleNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(TaskLevel l) noexcept {
  return kLevelNames[static_cast<std::size_t>(l)];
}
std::string_view to_string(Direction d) noexcept {
  return kDirectionNames[static_cast<std::size_t>(d)];
}
std::string_view to_string(ActionType t) noexcept {
  return kActionNames[static_cast<std::size_t>(t)];
}
std::string_view to_string(DifficultyTier t) noexcept {
  return kTierNames[static_cast<std::size_t>(t)];
}
std::string_view to_string(SampleSource s) noexcept {
  return kSourceNames[static_cast<std::size_t>(s)];
}
std::string_view to_string(Split s) noexcept { return kSplitNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(FailureAxis a) noexcept {
  return kAxisNames[static_cast<std::size_t>(a)];
}

template <>
std::optional<Role> enum_from_string<Role>(std::string_view s) noexcept {
  return lookup<Role>(kRoleNames, s);
}
template <>
std::optional<TaskLevel> enum_from_string<TaskLevel>(std::string_view s) noexcept {
  return lookup<TaskLevel>(kLevelNames, s);
}
template <>
std::optional<Direction> enum_from_string<Direction>(std::string_view s) noexcept {
  return lookup<Direction>(kDirectionNames, s);
}
template <>
std::optional<ActionType> enum_from_string<ActionType>(std::string_view s) noexcept {
  return lookup<ActionType>(kActionNames, s);
}
template <>
std::optional<DifficultyTier> enum_from_string<DifficultyTier>(std::string_view s) noexcept {
  return lookup<DifficultyTier>(kTierNames, s);
}
template <>
std::optional<SampleSource> enum_from_string<SampleSource>(std::string_view s) noexcept {
  return lookup<SampleSource>(kSourceNames, s);
}
template <>
std::optional<Split> enum_from_string<Split>(std::string_view s) noexcept {
  return lookup<Split>(kSplitNames, s);
}
template <>
std::optional<FailureAxis> enum_from_string<FailureAxis>(std::string_view s) noexcept {
  return lookup<FailureAxis>(kAxisNames, s);
}

}  // namespace rms
