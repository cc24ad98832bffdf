#pragma once

// Shared domain vocabulary: screens, actions, step contexts, trajectories and
// labeled reward samples. Every type is a plain value; equality is
// member-wise.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace rms {

/// A point in normalized screen coordinates, (0,0) top-left, (1,1) bottom-right.
struct Point {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Normalized rectangle. Containment is boundary-inclusive.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Point p) const noexcept {
    return p.u >= x0 && p.u <= x1 && p.v >= y0 && p.v <= y1;
  }
  Point center() const noexcept { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  double area() const noexcept { return (x1 - x0) * (y1 - y0); }
  /// Euclidean distance from p to the closest point of the box; 0 inside.
  double distance_to(Point p) const noexcept;

  friend bool operator==(const Box&, const Box&) = default;
};

enum class Role { button, text_field, list_item, icon, panel, other };

struct UiElement {
  std::string element_id;
  Box box;
  Role role = Role::other;
  std::optional<std::string> text;
  bool interactive = false;
  friend bool operator==(const UiElement&, const UiElement&) = default;
};

struct ScreenState {
  std::string screen_id;
  int width_px = 1080;
  int height_px = 2400;
  std::vector<UiElement> elements;

  const UiElement* find(std::string_view element_id) const noexcept;
  friend bool operator==(const ScreenState&, const ScreenState&) = default;
};

enum class TaskLevel { high, low };

struct TaskInstruction {
  std::string id;
  std::string text;
  TaskLevel level = TaskLevel::high;
  std::string app;
  friend bool operator==(const TaskInstruction&, const TaskInstruction&) = default;
};

// ---------------------------------------------------------------------------
// Actions

enum class Direction { up, down, left, right };

namespace act {
struct Click {
  Point point;
  friend bool operator==(const Click&, const Click&) = default;
};
struct LongPress {
  Point point;
  friend bool operator==(const LongPress&, const LongPress&) = default;
};
struct Swipe {
  Direction direction = Direction::up;
  std::optional<Point> start;
  friend bool operator==(const Swipe&, const Swipe&) = default;
};
struct InputText {
  std::string text;
  std::optional<Point> target;
  friend bool operator==(const InputText&, const InputText&) = default;
};
struct OpenApp {
  std::string name;
  friend bool operator==(const OpenApp&, const OpenApp&) = default;
};
struct Back {
  friend bool operator==(const Back&, const Back&) = default;
};
struct Home {
  friend bool operator==(const Home&, const Home&) = default;
};
struct Wait {
  friend bool operator==(const Wait&, const Wait&) = default;
};
struct Complete {
  friend bool operator==(const Complete&, const Complete&) = default;
};
struct Impossible {
  friend bool operator==(const Impossible&, const Impossible&) = default;
};
}  // namespace act

/// Order matches the alternatives of Action::Variant.
enum class ActionType {
  click,
  long_press,
  swipe,
  input_text,
  open_app,
  back,
  home,
  wait,
  complete,
  impossible
};
inline constexpr std::size_t kActionTypeCount = 10;

class Action {
 public:
  using Variant = std::variant<act::Click, act::LongPress, act::Swipe, act::InputText,
                               act::OpenApp, act::Back, act::Home, act::Wait,
                               act::Complete, act::Impossible>;

  Action() : v_(act::Wait{}) {}
  template <class T>
    requires(!std::is_same_v<std::remove_cvref_t<T>, Action> &&
             std::is_constructible_v<Variant, T &&>)
  Action(T&& alt) : v_(std::forward<T>(alt)) {}  // NOLINT(google-explicit-constructor)

  static Action click(double u, double v) { return act::Click{{u, v}}; }
  static Action long_press(double u, double v) { return act::LongPress{{u, v}}; }
  static Action swipe(Direction d, std::optional<Point> start = std::nullopt) {
    return act::Swipe{d, start};
  }
  static Action input_text(std::string text, std::optional<Point> target = std::nullopt) {
    return act::InputText{std::move(text), target};
  }
  static Action open_app(std::string name) { return act::OpenApp{std::move(name)}; }
  static Action back() { return act::Back{}; }
  static Action home() { return act::Home{}; }
  static Action wait() { return act::Wait{}; }
  static Action complete() { return act::Complete{}; }
  static Action impossible() { return act::Impossible{}; }

  ActionType type() const noexcept { return static_cast<ActionType>(v_.index()); }
  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  /// The coordinate the action acts on, if any (click/long-press point, swipe
  /// start, input target).
  std::optional<Point> point() const noexcept;
  /// Copy with the point replaced. Point-free variants are returned unchanged.
  Action with_point(Point p) const;

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Variant v_;
};

// ---------------------------------------------------------------------------
// Steps and trajectories

/// One entry of h_{1:t-1}: the screen acted on (by id), the action taken, and
/// the abstract target the action resolved to on that screen.
struct HistoryEntry {
  std::string screen_id;
  Action action;
  std::string target;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct StepGroundTruth {
  Action a_gt;
  std::vector<std::string> valid_regions;
  bool terminal = false;
  friend bool operator==(const StepGroundTruth&, const StepGroundTruth&) = default;
};

struct StepContext {
  TaskInstruction instruction;
  ScreenState screen;
  std::vector<HistoryEntry> history;
  int step_index = 1;
  friend bool operator==(const StepContext&, const StepContext&) = default;
};

struct TrajectoryStep {
  ScreenState screen;
  StepGroundTruth ground_truth;
  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  TaskInstruction task;
  std::vector<TrajectoryStep> steps;
  std::string app;
  std::size_t size() const noexcept { return steps.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// ---------------------------------------------------------------------------
// Reward samples

enum class DifficultyTier { positive, easy_negative, moderate_negative, hard_negative };

enum class SampleSource {
  rule_verified,
  instruction_substitution,
  trajectory_stitching,
  os_agent_intent_error,
  os_agent_repaired
};

enum class Split { idd, ood };

/// Rule axes in their fixed evaluation order, plus `none` for passing samples.
enum class FailureAxis { type, spatial, semantic, prerequisite, none };

struct RewardSample {
  std::string id;
  StepContext context;
  Action candidate;
  bool label = false;
  DifficultyTier tier = DifficultyTier::positive;
  SampleSource source = SampleSource::rule_verified;
  Split split = Split::idd;
  std::optional<FailureAxis> failure_axis;
  friend bool operator==(const RewardSample&, const RewardSample&) = default;
};

// ---------------------------------------------------------------------------
// Errors

/// Input refers to something that does not exist (unknown element id, missing
/// ground truth, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: infeasible ranges, weights, paths.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Enum names (the canonical strings used on the wire)

std::string_view to_string(Role r) noexcept;
std::string_view to_string(TaskLevel l) noexcept;
std::string_view to_string(Direction d) noexcept;
std::string_view to_string(ActionType t) noexcept;
std::string_view to_string(DifficultyTier t) noexcept;
std::string_view to_string(SampleSource s) noexcept;
std::string_view to_string(Split s) noexcept;
std::string_view to_string(FailureAxis a) noexcept;

template <class E>
std::optional<E> enum_from_string(std::string_view s) noexcept;

template <> std::optional<Role> enum_from_string<Role>(std::string_view) noexcept;
template <> std::optional<TaskLevel> enum_from_string<TaskLevel>(std::string_view) noexcept;
template <> std::optional<Direction> enum_from_string<Direction>(std::string_view) noexcept;
template <> std::optional<ActionType> enum_from_string<ActionType>(std::string_view) noexcept;
template <>
std::optional<DifficultyTier> enum_from_string<DifficultyTier>(std::string_view) noexcept;
template <> std::optional<SampleSource> enum_from_string<SampleSource>(std::string_view) noexcept;
template <> std::optional<Split> enum_from_string<Split>(std::string_view) noexcept;
template <> std::optional<FailureAxis> enum_from_string<FailureAxis>(std::string_view) noexcept;

Direction opposite(Direction d) noexcept;

}  // namespace rms
