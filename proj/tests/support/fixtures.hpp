#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "rms/codec.hpp"
#include "rms/eok.hpp"
#include "rms/rng.hpp"
#include "rms/types.hpp"
#include "rms/world.hpp"

namespace rms {

// Readable gtest failure output.
inline void PrintTo(const Action& a, std::ostream* os) { *os << dump_canonical(encode(a)); }

}  // namespace rms

namespace rms::testing {

inline UiElement element(std::string id, Box box, Role role, std::optional<std::string> text,
                         bool interactive = true) {
  return UiElement{std::move(id), box, role, std::move(text), interactive};
}

/// Generated worlds are immutable, so tests share one per (seed, apps, tasks).
inline const World& shared_world(std::uint64_t seed = 7, int apps = 20, int tasks_per_app = 10) {
  static std::mutex mu;
  static std::map<std::tuple<std::uint64_t, int, int>, std::unique_ptr<World>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{seed, apps, tasks_per_app}];
  if (!slot) {
    WorldSpec spec;
    spec.seed = seed;
    spec.n_apps = apps;
    spec.n_tasks_per_app = tasks_per_app;
    slot = std::make_unique<World>(generate_world(spec));
  }
  return *slot;
}

// ---------------------------------------------------------------------------
// Charging-station app: launcher -> search bar -> category entry, with the
// functional-panel swipe as an optional branch off the launch.

inline ScreenState charging_home() {
  ScreenState s;
  s.screen_id = "charge-home";
  s.elements = {
      element("root", {0.0, 0.0, 1.0, 1.0}, Role::panel, std::nullopt, false),
      element("search", {0.05, 0.05, 0.95, 0.12}, Role::text_field, "Search"),
      element("panel", {0.0, 0.2, 1.0, 0.5}, Role::panel, "Functions", false),
      element("category", {0.1, 0.55, 0.9, 0.65}, Role::list_item, "Charging Station"),
      element("map", {0.1, 0.7, 0.9, 0.8}, Role::button, "Map"),
  };
  return s;
}

inline EokGraph charging_station_graph() {
  EokGraph g;
  g.pattern_id = "find-charging-station";
  g.nodes = {
      {"launch", ActionType::open_app, "EV Charge"},
      {"search", ActionType::click, "Search"},
      {"panel", ActionType::swipe, std::string(kAnyTarget)},
      {"category", ActionType::click, "Charging Station"},
  };
  g.edges = {{"launch", "search"}, {"launch", "panel"}, {"search", "category"}};
  return g;
}

inline HistoryEntry entry(const ScreenState& screen, const Action& a) {
  return history_entry(screen, a);
}

// ---------------------------------------------------------------------------
// Seeded generators of valid entities.

class EntityGen {
 public:
  explicit EntityGen(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static const char* kWords[] = {"alpha", "Beta", "café", "  spaced  out ", "order", "Paris",
                                   "weiß", "x", "Settings", "日本"};
    return kWords[rng_.index(std::size(kWords))];
  }
  std::string id(std::string_view prefix) { return std::string(prefix) + "-" + std::to_string(rng_.index(100000)); }

  Point point() { return {rng_.uniform(), rng_.uniform()}; }
  Box box() {
    const double x0 = rng_.uniform(0.0, 0.8), y0 = rng_.uniform(0.0, 0.8);
    return {x0, y0, rng_.uniform(x0 + 0.01, 1.0), rng_.uniform(y0 + 0.01, 1.0)};
  }
  std::optional<Point> maybe_point() {
    if (rng_.bernoulli(0.5)) return point();
    return std::nullopt;
  }

  UiElement ui_element(std::string id) {
    std::optional<std::string> text;
    if (rng_.bernoulli(0.7)) text = word();
    return element(std::move(id), box(), static_cast<Role>(rng_.index(6)), text,
                   rng_.bernoulli(0.5));
  }

  ScreenState screen() {
    ScreenState s;
    s.screen_id = id("screen");
    s.width_px = 720 + static_cast<int>(rng_.index(800));
    s.height_px = 1280 + static_cast<int>(rng_.index(1500));
    const std::size_t n = 1 + rng_.index(6);
    for (std::size_t i = 0; i < n; ++i) s.elements.push_back(ui_element("e" + std::to_string(i)));
    return s;
  }

  TaskInstruction instruction() {
    return {id("task"), "open " + word(), rng_.bernoulli(0.5) ? TaskLevel::high : TaskLevel::low,
            "app" + std::to_string(rng_.index(10))};
  }

  Action action() {
    switch (rng_.index(kActionTypeCount)) {
      case 0: return Action::click(rng_.uniform(), rng_.uniform());
      case 1: return Action::long_press(rng_.uniform(), rng_.uniform());
      case 2: return Action::swipe(static_cast<Direction>(rng_.index(4)), maybe_point());
      case 3: return Action::input_text(word(), maybe_point());
      case 4: return Action::open_app(word());
      case 5: return Action::back();
      case 6: return Action::home();
      case 7: return Action::wait();
      case 8: return Action::complete();
      default: return Action::impossible();
    }
  }

  StepContext context() {
    StepContext c;
    c.instruction = instruction();
    c.screen = screen();
    c.step_index = 1 + static_cast<int>(rng_.index(5));
    for (int i = 1; i < c.step_index; ++i) {
      c.history.push_back({id("screen"), action(), rng_.bernoulli(0.5) ? word() : std::string()});
    }
    return c;
  }

  StepGroundTruth ground_truth(const ScreenState& screen, bool terminal) {
    StepGroundTruth gt;
    gt.terminal = terminal;
    gt.a_gt = terminal ? Action::complete() : action();
    if (gt.a_gt.type() == ActionType::complete && !terminal) gt.a_gt = Action::back();
    gt.valid_regions.push_back(screen.elements[rng_.index(screen.elements.size())].element_id);
    return gt;
  }

  Trajectory trajectory() {
    Trajectory t;
    t.task = instruction();
    t.app = t.task.app;
    const std::size_t n = 1 + rng_.index(5);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = screen();
      auto gt = ground_truth(s, i + 1 == n);
      t.steps.push_back({std::move(s), std::move(gt)});
    }
    return t;
  }

  RewardSample sample() {
    RewardSample s;
    s.id = id("sample");
    s.context = context();
    s.candidate = action();
    s.label = rng_.bernoulli(0.5);
    s.split = rng_.bernoulli(0.3) ? Split::ood : Split::idd;
    if (s.label) {
      s.tier = DifficultyTier::positive;
      if (rng_.bernoulli(0.5)) s.failure_axis = FailureAxis::none;
      s.source = static_cast<SampleSource>(rng_.index(5));
    } else {
      s.tier = static_cast<DifficultyTier>(1 + rng_.index(3));
      s.failure_axis = static_cast<FailureAxis>(rng_.index(4));
      s.source = static_cast<SampleSource>(rng_.index(5));
    }
    return s;
  }

  EokGraph eok() {
    EokGraph g;
    g.pattern_id = id("pattern");
    const std::size_t n = 1 + rng_.index(5);
    for (std::size_t i = 0; i < n; ++i) {
      g.nodes.push_back({"n" + std::to_string(i), static_cast<ActionType>(rng_.index(kActionTypeCount)),
                         rng_.bernoulli(0.2) ? std::string(kAnyTarget) : word()});
      if (i > 0) g.edges.emplace_back("n" + std::to_string(rng_.index(i)), "n" + std::to_string(i));
    }
    return g;
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

}  // namespace rms::testing
