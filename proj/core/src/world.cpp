#include "rms/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "rms/rng.hpp"
#include "rms/text.hpp"
#include "rms/verifier.hpp"

namespace rms {

namespace {

// IDD and OOD apps draw from disjoint vocabularies.
struct Vocabulary {
  std::vector<std::string_view> app_stems;
  std::vector<std::string_view> adjectives;
  std::vector<std::string_view> nouns;
  std::vector<std::string_view> phrases;
  std::array<Role, 2> clickable;
};

const Vocabulary& vocabulary(Split split) {
  static const Vocabulary idd{
      {"maple", "cedar", "harbor", "summit", "meadow", "orbit", "pixel", "river"},
      {"quick", "daily", "smart", "green", "bright", "local", "prime", "swift", "urban", "silent",
       "golden", "rapid", "simple", "secure", "social", "private", "weekly", "family", "global",
       "mobile", "cozy", "fresh", "lucky", "royal"},
      {"taxi", "order", "wallet", "ticket", "coupon", "alarm", "playlist", "recipe", "parcel",
       "invoice", "contact", "calendar", "message", "photo", "album", "station", "battery",
       "account", "profile", "receipt", "voucher", "podcast", "booking", "basket"},
      {"Paris", "green tea", "weekly report", "blue jacket", "morning run", "pizza margherita",
       "Berlin", "board games", "jazz night", "spare keys"},
      {Role::button, Role::icon}};
  static const Vocabulary ood{
      {"quartz", "nebula", "tundra", "vortex", "lagoon", "ember", "zephyr", "basalt"},
      {"amber", "hollow", "velvet", "crimson", "lunar", "frosty", "mellow", "dusky", "ivory",
       "rustic", "stormy", "sandy", "misty", "jade", "coral", "tawny", "brisk", "noble", "ornate",
       "polar", "sable", "sunny", "wild", "quiet"},
      {"kiosk", "harvest", "lantern", "compass", "anchor", "orchard", "gallery", "cabin",
       "voyage", "festival", "garden", "workshop", "library", "market", "canyon", "island",
       "studio", "theater", "bakery", "stable", "tavern", "forge", "quarry", "meadowlark"},
      {"Lisbon", "oolong", "field notes", "red scarf", "evening swim", "noodle soup", "Oslo",
       "chess club", "folk concert", "spare tire"},
      {Role::list_item, Role::other}};
  return split == Split::idd ? idd : ood;
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

std::vector<Box> grid_layout(std::size_t count, std::size_t cols, double top = 0.1,
                             double bottom = 0.95, double margin = 0.02) {
  std::vector<Box> out;
  if (count == 0) return out;
  cols = std::min(cols, count);
  const std::size_t rows = (count + cols - 1) / cols;
  const double w = 1.0 / static_cast<double>(cols);
  const double h = (bottom - top) / static_cast<double>(rows);
  for (std::size_t i = 0; i < count; ++i) {
    const double c = static_cast<double>(i % cols);
    const double r = static_cast<double>(i / cols);
    out.push_back({round4(c * w + margin), round4(top + r * h + margin),
                   round4((c + 1) * w - margin), round4(top + (r + 1) * h - margin)});
  }
  return out;
}

UiElement root_element() { return {"root", {0.0, 0.0, 1.0, 1.0}, Role::panel, std::nullopt, false}; }

enum class StepKind { click, long_press, input_text, swipe };

class Generator {
 public:
  explicit Generator(const WorldSpec& spec) : spec_(spec), rng_(spec.seed) {}

  World run() {
    World w;
    w.spec = spec_;
    make_apps(w);
    const ScreenState launcher = make_launcher(w);
    for (const auto& app : w.apps) make_app_tasks(w, app, launcher);
    w.build_index();
    return w;
  }

 private:
  void make_apps(World& w) {
    const auto n = static_cast<std::size_t>(spec_.n_apps);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng_.shuffle(order);
    std::vector<Split> split(n, Split::idd);
    for (std::size_t i = 0; i < ood_app_count(spec_); ++i) split[order[i]] = Split::ood;
    std::array<std::size_t, 2> counter{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& vocab = vocabulary(split[i]);
      const std::size_t k = counter[static_cast<std::size_t>(split[i])]++;
      std::string name(vocab.app_stems[k % vocab.app_stems.size()]);
      const std::size_t suffix = k / vocab.app_stems.size() + 1;
      name += (suffix < 10 ? "0" : "") + std::to_string(suffix);
      w.apps.push_back({name, split[i]});
    }
  }

  ScreenState make_launcher(const World& w) {
    ScreenState s;
    s.screen_id = "launcher";
    s.elements.push_back(root_element());
    const auto boxes = grid_layout(w.apps.size(), 4, 0.08, 0.98, 0.01);
    for (std::size_t i = 0; i < w.apps.size(); ++i) {
      s.elements.push_back(
          {"app" + std::to_string(i + 1), boxes[i], Role::icon, w.apps[i].name, true});
    }
    return s;
  }

  /// Globally unique two-word label.
  std::string unique_label(Split split) {
    const auto& v = vocabulary(split);
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::string label = std::string(v.adjectives[rng_.index(v.adjectives.size())]) + " " +
                          std::string(v.nouns[rng_.index(v.nouns.size())]);
      if (used_labels_.insert(label).second) return label;
    }
    std::string base = std::string(v.adjectives[rng_.index(v.adjectives.size())]) + " " +
                       std::string(v.nouns[rng_.index(v.nouns.size())]);
    for (int n = 2;; ++n) {
      std::string label = base + " " + std::to_string(n);
      if (used_labels_.insert(label).second) return label;
    }
  }

  std::string decoy_word(Split split) {
    const auto& v = vocabulary(split);
    return std::string(rng_.bernoulli(0.5) ? v.adjectives[rng_.index(v.adjectives.size())]
                                           : v.nouns[rng_.index(v.nouns.size())]);
  }

  Role clickable_role(Split split) { return vocabulary(split).clickable[rng_.index(2)]; }

  void make_app_tasks(World& w, const AppInfo& app, const ScreenState& launcher) {
    const auto n_tasks = static_cast<std::size_t>(spec_.n_tasks_per_app);
    const std::size_t app_pos = static_cast<std::size_t>(
        std::find(w.apps.begin(), w.apps.end(), app) - w.apps.begin());
    const std::string icon_id = "app" + std::to_string(app_pos + 1);

    // Home screen: one entry per task plus decoys.
    ScreenState home;
    home.screen_id = app.name + "/home";
    home.elements.push_back(root_element());
    const int extra = std::max(0, rng_.between(spec_.elements_per_screen.min,
                                               spec_.elements_per_screen.max) -
                                      spec_.n_tasks_per_app);
    const std::size_t slots = n_tasks + static_cast<std::size_t>(extra);
    std::vector<std::size_t> slot_order(slots);
    for (std::size_t i = 0; i < slots; ++i) slot_order[i] = i;
    rng_.shuffle(slot_order);
    const auto boxes = grid_layout(slots, slots > 8 ? 3 : 2);
    std::vector<std::string> entry_ids(n_tasks);
    std::vector<std::string> entry_labels(n_tasks);
    std::vector<UiElement> home_elements(slots);
    for (std::size_t i = 0; i < slots; ++i) {
      const std::size_t cell = slot_order[i];
      UiElement e;
      e.element_id = "e" + std::to_string(cell + 1);
      e.box = boxes[cell];
      e.role = clickable_role(app.split);
      e.interactive = true;
      if (i < n_tasks) {
        entry_labels[i] = unique_label(app.split);
        e.text = entry_labels[i];
        entry_ids[i] = e.element_id;
      } else {
        e.text = decoy_word(app.split);
      }
      home_elements[cell] = std::move(e);
    }
    for (auto& e : home_elements) home.elements.push_back(std::move(e));

    for (std::size_t t = 0; t < n_tasks; ++t) {
      make_task(w, app, launcher, icon_id, home, entry_ids[t], entry_labels[t], t);
    }
  }

  void make_task(World& w, const AppInfo& app, const ScreenState& launcher,
                 const std::string& icon_id, const ScreenState& home, const std::string& entry_id,
                 const std::string& entry_label, std::size_t ordinal) {
    Trajectory traj;
    traj.app = app.name;
    traj.task.id = app.name + ".t" + std::string(ordinal + 1 < 10 ? "0" : "") +
                   std::to_string(ordinal + 1);
    traj.task.app = app.name;
    traj.task.level = rng_.bernoulli(0.5) ? TaskLevel::high : TaskLevel::low;

    const int n_steps = rng_.between(spec_.steps_distribution.min, spec_.steps_distribution.max);

    traj.steps.push_back({launcher, {Action::open_app(app.name), {icon_id}, false}});
    const UiElement* entry = home.find(entry_id);
    traj.steps.push_back(
        {home, {Action::click(entry->box.center().u, entry->box.center().v), {entry_id}, false}});

    std::vector<std::string> phrases{"open '" + entry_label + "'"};
    for (int s = 3; s < n_steps; ++s) {
      phrases.push_back(make_middle_step(traj, app, s));
    }

    ScreenState last;
    last.screen_id = traj.task.id + "/s" + std::to_string(n_steps);
    last.elements.push_back(root_element());
    const auto k = static_cast<std::size_t>(
        rng_.between(spec_.elements_per_screen.min, spec_.elements_per_screen.max));
    const auto boxes = grid_layout(k, 2);
    for (std::size_t i = 0; i < k; ++i) {
      last.elements.push_back({"e" + std::to_string(i + 1), boxes[i], clickable_role(app.split),
                               decoy_word(app.split), true});
    }
    traj.steps.push_back({std::move(last), {Action::complete(), {"root"}, true}});

    if (traj.task.level == TaskLevel::high) {
      traj.task.text = "In " + app.name + ", " + phrases.back() + " via '" + entry_label + "'";
    } else {
      traj.task.text = "Open " + app.name;
      for (const auto& p : phrases) traj.task.text += ", " + p;
      traj.task.text += ", then finish";
    }

    EokGraph g;
    g.pattern_id = traj.task.id;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      const auto& st = traj.steps[i];
      auto tmpl = describe_action(st.ground_truth.a_gt, st.screen);
      g.nodes.push_back({"n" + std::to_string(i + 1), tmpl.type,
                         tmpl.target.empty() ? std::string(kAnyTarget) : tmpl.target});
      if (i > 0) g.edges.emplace_back("n" + std::to_string(i), "n" + std::to_string(i + 1));
    }

    w.tasks.push_back(traj.task);
    w.trajectories.push_back(std::move(traj));
    w.eok.push_back(std::move(g));
  }

  /// Builds step `s` (1-based) and returns its instruction phrase.
  std::string make_middle_step(Trajectory& traj, const AppInfo& app, int s) {
    const double u = rng_.uniform();
    const StepKind kind = u < 0.5    ? StepKind::click
                          : u < 0.65 ? StepKind::long_press
                          : u < 0.85 ? StepKind::input_text
                                     : StepKind::swipe;
    const auto k = static_cast<std::size_t>(
        rng_.between(spec_.elements_per_screen.min, spec_.elements_per_screen.max));
    const std::size_t target = rng_.index(k);
    const auto boxes = grid_layout(k, 2);

    ScreenState screen;
    screen.screen_id = traj.task.id + "/s" + std::to_string(s);
    screen.elements.push_back(root_element());
    std::string target_id;
    std::string label;
    for (std::size_t i = 0; i < k; ++i) {
      UiElement e{"e" + std::to_string(i + 1), boxes[i], clickable_role(app.split), {}, true};
      if (i == target) {
        label = unique_label(app.split);
        e.text = label;
        if (kind == StepKind::input_text) e.role = Role::text_field;
        if (kind == StepKind::swipe) e.role = Role::panel;
        target_id = e.element_id;
      } else {
        e.text = decoy_word(app.split);
      }
      screen.elements.push_back(std::move(e));
    }

    const Point c = boxes[target].center();
    Action gt;
    std::string phrase;
    switch (kind) {
      case StepKind::click:
        gt = Action::click(c.u, c.v);
        phrase = "tap '" + label + "'";
        break;
      case StepKind::long_press:
        gt = Action::long_press(c.u, c.v);
        phrase = "press and hold '" + label + "'";
        break;
      case StepKind::input_text: {
        const auto& v = vocabulary(app.split);
        const std::string text(v.phrases[rng_.index(v.phrases.size())]);
        gt = Action::input_text(text, c);
        phrase = "type \"" + text + "\" into '" + label + "'";
        break;
      }
      case StepKind::swipe: {
        const auto dir = static_cast<Direction>(rng_.index(4));
        gt = Action::swipe(dir, c);
        phrase = "swipe " + std::string(to_string(dir)) + " on '" + label + "'";
        break;
      }
    }
    traj.steps.push_back({std::move(screen), {gt, {target_id}, false}});
    return phrase;
  }

  WorldSpec spec_;
  Rng rng_;
  std::set<std::string> used_labels_;
};

IntRange read_range(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(std::string(field) + ": expected [min, max] integers");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

void check_spec(const WorldSpec& spec) {
  if (spec.n_apps < 1 || spec.n_apps > 400) throw ConfigError("n_apps: must be in [1, 400]");
  if (spec.n_tasks_per_app < 1 || spec.n_tasks_per_app > 60) {
    throw ConfigError("n_tasks_per_app: must be in [1, 60]");
  }
  const auto& sd = spec.steps_distribution;
  if (sd.min > sd.max) throw ConfigError("steps_distribution: min > max");
  if (sd.min < 3) throw ConfigError("steps_distribution: min must be at least 3");
  if (sd.max > 64) throw ConfigError("steps_distribution: max must be at most 64");
  const auto& el = spec.elements_per_screen;
  if (el.min > el.max) throw ConfigError("elements_per_screen: min > max");
  if (el.min < 1) throw ConfigError("elements_per_screen: min must be at least 1");
  if (el.max > 40) throw ConfigError("elements_per_screen: max must be at most 40");
  if (!(spec.ood_app_fraction >= 0.0 && spec.ood_app_fraction < 1.0)) {
    throw ConfigError("ood_app_fraction: must be in [0, 1)");
  }
  if (ood_app_count(spec) >= static_cast<std::size_t>(spec.n_apps)) {
    throw ConfigError("ood_app_fraction: leaves no in-domain app");
  }
}

std::size_t ood_app_count(const WorldSpec& spec) {
  const double x = spec.ood_app_fraction * static_cast<double>(spec.n_apps);
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

json encode(const WorldSpec& spec) {
  return {{"seed", spec.seed},
          {"n_apps", spec.n_apps},
          {"n_tasks_per_app", spec.n_tasks_per_app},
          {"steps_distribution", {spec.steps_distribution.min, spec.steps_distribution.max}},
          {"elements_per_screen", {spec.elements_per_screen.min, spec.elements_per_screen.max}},
          {"ood_app_fraction", spec.ood_app_fraction}};
}

WorldSpec world_spec_from_json(const json& j, bool strict) {
  if (!j.is_object()) throw ConfigError("world spec: expected an object");
  WorldSpec s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const json& v = it.value();
    auto integer = [&]() {
      if (!v.is_number_integer()) throw ConfigError(k + ": expected an integer");
      return v.get<long long>();
    };
    if (k == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("seed: expected a non-negative integer");
      }
      s.seed = v.get<std::uint64_t>();
    } else if (k == "n_apps") {
      s.n_apps = static_cast<int>(integer());
    } else if (k == "n_tasks_per_app") {
      s.n_tasks_per_app = static_cast<int>(integer());
    } else if (k == "steps_distribution") {
      s.steps_distribution = read_range(v, "steps_distribution");
    } else if (k == "elements_per_screen") {
      s.elements_per_screen = read_range(v, "elements_per_screen");
    } else if (k == "ood_app_fraction") {
      if (!v.is_number()) throw ConfigError("ood_app_fraction: expected a number");
      s.ood_app_fraction = v.get<double>();
    } else if (strict) {
      throw ConfigError(k + ": unknown field");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

void World::build_index() {
  task_pos_.clear();
  app_split_.clear();
  for (const auto& a : apps) app_split_[a.name] = a.split;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!task_pos_.emplace(tasks[i].id, i).second) {
      throw DataError("duplicate task id '" + tasks[i].id + "'");
    }
  }
  if (trajectories.size() != tasks.size() || eok.size() != tasks.size()) {
    throw DataError("world: tasks, trajectories and eok graphs are not aligned");
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (trajectories[i].task.id != tasks[i].id || eok[i].pattern_id != tasks[i].id) {
      throw DataError("world: record order differs at task '" + tasks[i].id + "'");
    }
  }
}

Split World::split_of_app(std::string_view app) const {
  auto it = app_split_.find(std::string(app));
  if (it == app_split_.end()) throw DataError("unknown app '" + std::string(app) + "'");
  return it->second;
}

std::size_t World::task_index(std::string_view task_id) const {
  auto it = task_pos_.find(std::string(task_id));
  if (it == task_pos_.end()) throw DataError("unknown task '" + std::string(task_id) + "'");
  return it->second;
}

const EokGraph& World::eok_for(std::string_view task_id) const { return eok[task_index(task_id)]; }

StepRef World::lookup(std::string_view task_id, int step_index) const {
  const std::size_t i = task_index(task_id);
  const auto& t = trajectories[i];
  if (step_index < 1 || static_cast<std::size_t>(step_index) > t.steps.size()) {
    throw DataError("no ground truth for task '" + std::string(task_id) + "' step " +
                    std::to_string(step_index));
  }
  return {&t, static_cast<std::size_t>(step_index - 1), &eok[i], split_of_app(t.app)};
}

World generate_world(const WorldSpec& spec) {
  check_spec(spec);
  return Generator(spec).run();
}

HistoryEntry history_entry(const ScreenState& screen, const Action& action) {
  return {screen.screen_id, action, describe_action(action, screen).target};
}

std::vector<HistoryEntry> gt_history(const Trajectory& t, std::size_t i) {
  std::vector<HistoryEntry> h;
  h.reserve(i);
  for (std::size_t k = 0; k < i && k < t.steps.size(); ++k) {
    h.push_back(history_entry(t.steps[k].screen, t.steps[k].ground_truth.a_gt));
  }
  return h;
}

StepContext make_context(const Trajectory& t, std::size_t i, std::vector<HistoryEntry> history) {
  return {t.task, t.steps.at(i).screen, std::move(history), static_cast<int>(i) + 1};
}

std::vector<TaskInstruction> training_tasks(const World& world) {
  std::vector<TaskInstruction> out;
  for (const auto& t : world.tasks) {
    if (world.split_of_app(t.app) == Split::idd) out.push_back(t);
  }
  return out;
}

Violations validate(const World& world) {
  Violations out = validate_unique_ids(world.tasks);
  if (world.trajectories.size() != world.tasks.size() || world.eok.size() != world.tasks.size()) {
    out.emplace_back("world: tasks, trajectories and eok are not aligned");
    return out;
  }
  for (std::size_t i = 0; i < world.tasks.size(); ++i) {
    const std::string at = world.tasks[i].id + ": ";
    const Trajectory& t = world.trajectories[i];
    for (auto& m : validate(t)) out.push_back(at + m);
    for (auto& m : validate(world.eok[i])) out.push_back(at + "eok." + m);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto r = verify(gt_context(t, k), t.steps[k].ground_truth, t.steps[k].ground_truth.a_gt,
                            &world.eok[i]);
      if (!r.passed) {
        out.push_back(at + "step " + std::to_string(k + 1) + ": ground truth fails " +
                      std::string(to_string(r.failure_or_none())) + ": " + r.reason);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Directory form

void export_world(const World& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json apps = json::array();
  for (const auto& a : world.apps) apps.push_back({{"name", a.name}, {"split", to_string(a.split)}});
  write_json_file(dir / "world.json", {{"spec", encode(world.spec)}, {"apps", std::move(apps)}});
  write_records(dir / "tasks.jsonl", world.tasks);
  write_records(dir / "eok.jsonl", world.eok);

  std::vector<json> screens;
  std::set<std::string> seen;
  std::vector<json> trajectories;
  for (const auto& t : world.trajectories) {
    json steps = json::array();
    for (const auto& st : t.steps) {
      if (seen.insert(st.screen.screen_id).second) screens.push_back(encode(st.screen));
      steps.push_back({{"screen_id", st.screen.screen_id},
                       {"ground_truth", encode(st.ground_truth)}});
    }
    trajectories.push_back({{"task_id", t.task.id}, {"app", t.app}, {"steps", std::move(steps)}});
  }
  write_jsonl(dir / "screens.jsonl", screens);
  write_jsonl(dir / "trajectories.jsonl", trajectories);
}

World import_world(const std::filesystem::path& dir, DecodeOptions opts) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("world directory '" + dir.string() + "' does not exist");
  }
  World w;
  const json meta = read_json_file(dir / "world.json");
  try {
    w.spec = world_spec_from_json(meta.at("spec"), opts.strict);
  } catch (const json::exception& e) {
    throw ParseError("world.spec", e.what());
  }
  {
    DecodeCtx ctx("world", opts);
    ctx.object(meta);
    ctx.check_keys(meta, {"spec", "apps"});
    const auto apps_ctx = ctx.at("apps");
    const json& apps = apps_ctx.array(ctx.require(meta, "apps"));
    for (std::size_t i = 0; i < apps.size(); ++i) {
      const auto ac = apps_ctx.at(i);
      ac.object(apps[i]);
      ac.check_keys(apps[i], {"name", "split"});
      w.apps.push_back({ac.at("name").string(ac.require(apps[i], "name")),
                        ac.at("split").enumeration<Split>(ac.require(apps[i], "split"))});
    }
  }
  w.tasks = read_records<TaskInstruction>(dir / "tasks.jsonl", opts);
  w.eok = read_records<EokGraph>(dir / "eok.jsonl", opts);

  std::unordered_map<std::string, ScreenState> screens;
  for (auto& s : read_records<ScreenState>(dir / "screens.jsonl", opts)) {
    std::string id = s.screen_id;
    screens.emplace(std::move(id), std::move(s));
  }
  std::unordered_map<std::string, const TaskInstruction*> tasks;
  for (const auto& t : w.tasks) tasks[t.id] = &t;

  for (const auto& [line, value] : read_jsonl(dir / "trajectories.jsonl")) {
    try {
      DecodeCtx ctx("trajectory", opts);
      ctx.object(value);
      ctx.check_keys(value, {"task_id", "app", "steps"});
      Trajectory t;
      const std::string task_id = ctx.at("task_id").string(ctx.require(value, "task_id"));
      auto task = tasks.find(task_id);
      if (task == tasks.end()) ctx.at("task_id").fail("unknown task '" + task_id + "'");
      t.task = *task->second;
      t.app = ctx.at("app").string(ctx.require(value, "app"));
      const auto sc = ctx.at("steps");
      const json& steps = sc.array(ctx.require(value, "steps"));
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto stc = sc.at(i);
        stc.object(steps[i]);
        stc.check_keys(steps[i], {"screen_id", "ground_truth"});
        const std::string sid = stc.at("screen_id").string(stc.require(steps[i], "screen_id"));
        auto screen = screens.find(sid);
        if (screen == screens.end()) stc.at("screen_id").fail("unknown screen '" + sid + "'");
        TrajectoryStep step;
        step.screen = screen->second;
        read(stc.require(steps[i], "ground_truth"), stc.at("ground_truth"), step.ground_truth);
        t.steps.push_back(std::move(step));
      }
      w.trajectories.push_back(std::move(t));
    } catch (const ParseError& e) {
      throw e.at_line(line);
    }
  }
  w.build_index();
  return w;
}

}  // namespace rms
