#include "rms/codec.hpp"

#include <fstream>
#include <sstream>

namespace rms {

ParseError::ParseError(std::string field, std::string message, std::size_t line)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         field + ": " + message),
      field_(std::move(field)),
      detail_(std::move(message)),
      line_(line) {}

DecodeCtx DecodeCtx::at(std::string_view key) const {
  return DecodeCtx(path_.empty() ? std::string(key) : path_ + "." + std::string(key), opts_);
}

DecodeCtx DecodeCtx::at(std::size_t index) const {
  return DecodeCtx(path_ + "[" + std::to_string(index) + "]", opts_);
}

void DecodeCtx::fail(const std::string& message) const { throw ParseError(path_, message); }

const json& DecodeCtx::object(const json& j) const {
  if (!j.is_object()) fail("expected an object");
  return j;
}

const json& DecodeCtx::require(const json& obj, std::string_view key) const {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) at(key).fail("missing required field");
  return *it;
}

const json* DecodeCtx::optional(const json& obj, std::string_view key) const {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

void DecodeCtx::check_keys(const json& obj, std::initializer_list<std::string_view> allowed) const {
  if (!opts_.strict) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : allowed) known = known || it.key() == k;
    if (!known) at(it.key()).fail("unknown field");
  }
}

std::string DecodeCtx::string(const json& j) const {
  if (!j.is_string()) fail("expected a string");
  return j.get<std::string>();
}

double DecodeCtx::number(const json& j) const {
  if (!j.is_number()) fail("expected a number");
  return j.get<double>();
}

long long DecodeCtx::integer(const json& j) const {
  if (!j.is_number_integer()) fail("expected an integer");
  return j.get<long long>();
}

bool DecodeCtx::boolean(const json& j) const {
  if (!j.is_boolean()) fail("expected a boolean");
  return j.get<bool>();
}

bool DecodeCtx::binary(const json& j) const {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v == 0 || v == 1) return v == 1;
  }
  fail("expected 0 or 1");
}

const json& DecodeCtx::array(const json& j) const {
  if (!j.is_array()) fail("expected an array");
  return j;
}

// ---------------------------------------------------------------------------

json encode(const Point& p) { return {{"u", p.u}, {"v", p.v}}; }

json encode(const Box& b) { return {{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}}; }

json encode(const UiElement& e) {
  json j = {{"element_id", e.element_id},
            {"box", encode(e.box)},
            {"role", to_string(e.role)},
            {"interactive", e.interactive}};
  if (e.text) j["text"] = *e.text;
  return j;
}

json encode(const ScreenState& s) {
  json elements = json::array();
  for (const auto& e : s.elements) elements.push_back(encode(e));
  return {{"screen_id", s.screen_id},
          {"width_px", s.width_px},
          {"height_px", s.height_px},
          {"elements", std::move(elements)}};
}

json encode(const TaskInstruction& t) {
  return {{"id", t.id}, {"text", t.text}, {"level", to_string(t.level)}, {"app", t.app}};
}

json encode(const Action& a) {
  json j = {{"type", to_string(a.type())}};
  std::visit(
      [&j](const auto& alt) {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, act::Click> || std::is_same_v<T, act::LongPress>) {
          j["point"] = encode(alt.point);
        } else if constexpr (std::is_same_v<T, act::Swipe>) {
          j["direction"] = to_string(alt.direction);
          if (alt.start) j["start"] = encode(*alt.start);
        } else if constexpr (std::is_same_v<T, act::InputText>) {
          j["text"] = alt.text;
          if (alt.target) j["target"] = encode(*alt.target);
        } else if constexpr (std::is_same_v<T, act::OpenApp>) {
          j["name"] = alt.name;
        }
      },
      a.variant());
  return j;
}

json encode(const HistoryEntry& h) {
  return {{"screen_id", h.screen_id}, {"action", encode(h.action)}, {"target", h.target}};
}

json encode(const StepGroundTruth& gt) {
  return {{"a_gt", encode(gt.a_gt)}, {"valid_regions", gt.valid_regions}, {"terminal", gt.terminal}};
}

json encode(const StepContext& c) {
  json history = json::array();
  for (const auto& h : c.history) history.push_back(encode(h));
  return {{"instruction", encode(c.instruction)},
          {"screen", encode(c.screen)},
          {"history", std::move(history)},
          {"step_index", c.step_index}};
}

json encode(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"screen", encode(s.screen)}, {"ground_truth", encode(s.ground_truth)}});
  }
  return {{"task", encode(t.task)}, {"steps", std::move(steps)}, {"app", t.app}};
}

json encode(const RewardSample& s) {
  json j = {{"id", s.id},
            {"context", encode(s.context)},
            {"candidate", encode(s.candidate)},
            {"label", s.label ? 1 : 0},
            {"tier", to_string(s.tier)},
            {"source", to_string(s.source)},
            {"split", to_string(s.split)}};
  if (s.failure_axis) j["failure_axis"] = to_string(*s.failure_axis);
  return j;
}

json encode(const EokNode& n) {
  return {{"id", n.id},
          {"action_type", to_string(n.action_type)},
          {"target_descriptor", n.target_descriptor}};
}

json encode(const EokGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(encode(n));
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  return {{"pattern_id", g.pattern_id}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

// ---------------------------------------------------------------------------

void read(const json& j, const DecodeCtx& ctx, Point& out) {
  ctx.object(j);
  ctx.check_keys(j, {"u", "v"});
  out.u = ctx.at("u").number(ctx.require(j, "u"));
  out.v = ctx.at("v").number(ctx.require(j, "v"));
}

void read(const json& j, const DecodeCtx& ctx, Box& out) {
  ctx.object(j);
  ctx.check_keys(j, {"x0", "y0", "x1", "y1"});
  out.x0 = ctx.at("x0").number(ctx.require(j, "x0"));
  out.y0 = ctx.at("y0").number(ctx.require(j, "y0"));
  out.x1 = ctx.at("x1").number(ctx.require(j, "x1"));
  out.y1 = ctx.at("y1").number(ctx.require(j, "y1"));
}

void read(const json& j, const DecodeCtx& ctx, UiElement& out) {
  ctx.object(j);
  ctx.check_keys(j, {"element_id", "box", "role", "text", "interactive"});
  out.element_id = ctx.at("element_id").string(ctx.require(j, "element_id"));
  read(ctx.require(j, "box"), ctx.at("box"), out.box);
  out.role = ctx.at("role").enumeration<Role>(ctx.require(j, "role"));
  out.text.reset();
  if (const json* t = ctx.optional(j, "text")) out.text = ctx.at("text").string(*t);
  out.interactive = ctx.at("interactive").boolean(ctx.require(j, "interactive"));
}

void read(const json& j, const DecodeCtx& ctx, ScreenState& out) {
  ctx.object(j);
  ctx.check_keys(j, {"screen_id", "width_px", "height_px", "elements"});
  out.screen_id = ctx.at("screen_id").string(ctx.require(j, "screen_id"));
  out.width_px = static_cast<int>(ctx.at("width_px").integer(ctx.require(j, "width_px")));
  out.height_px = static_cast<int>(ctx.at("height_px").integer(ctx.require(j, "height_px")));
  out.elements = decode_list<UiElement>(ctx.require(j, "elements"), ctx.at("elements"));
}

void read(const json& j, const DecodeCtx& ctx, TaskInstruction& out) {
  ctx.object(j);
  ctx.check_keys(j, {"id", "text", "level", "app"});
  out.id = ctx.at("id").string(ctx.require(j, "id"));
  out.text = ctx.at("text").string(ctx.require(j, "text"));
  out.level = ctx.at("level").enumeration<TaskLevel>(ctx.require(j, "level"));
  out.app = ctx.at("app").string(ctx.require(j, "app"));
}

void read(const json& j, const DecodeCtx& ctx, Action& out) {
  ctx.object(j);
  const auto type = ctx.at("type").enumeration<ActionType>(ctx.require(j, "type"));
  auto point_at = [&](std::string_view key) {
    Point p;
    read(ctx.require(j, key), ctx.at(key), p);
    return p;
  };
  auto optional_point = [&](std::string_view key) -> std::optional<Point> {
    const json* pj = ctx.optional(j, key);
    if (pj == nullptr) return std::nullopt;
    Point p;
    read(*pj, ctx.at(key), p);
    return p;
  };
  switch (type) {
    case ActionType::click:
      ctx.check_keys(j, {"type", "point"});
      out = act::Click{point_at("point")};
      break;
    case ActionType::long_press:
      ctx.check_keys(j, {"type", "point"});
      out = act::LongPress{point_at("point")};
      break;
    case ActionType::swipe:
      ctx.check_keys(j, {"type", "direction", "start"});
      out = act::Swipe{ctx.at("direction").enumeration<Direction>(ctx.require(j, "direction")),
                       optional_point("start")};
      break;
    case ActionType::input_text:
      ctx.check_keys(j, {"type", "text", "target"});
      out = act::InputText{ctx.at("text").string(ctx.require(j, "text")),
                           optional_point("target")};
      break;
    case ActionType::open_app:
      ctx.check_keys(j, {"type", "name"});
      out = act::OpenApp{ctx.at("name").string(ctx.require(j, "name"))};
      break;
    case ActionType::back:
      ctx.check_keys(j, {"type"});
      out = act::Back{};
      break;
    case ActionType::home:
      ctx.check_keys(j, {"type"});
      out = act::Home{};
      break;
    case ActionType::wait:
      ctx.check_keys(j, {"type"});
      out = act::Wait{};
      break;
    case ActionType::complete:
      ctx.check_keys(j, {"type"});
      out = act::Complete{};
      break;
    case ActionType::impossible:
      ctx.check_keys(j, {"type"});
      out = act::Impossible{};
      break;
  }
}

void read(const json& j, const DecodeCtx& ctx, HistoryEntry& out) {
  ctx.object(j);
  ctx.check_keys(j, {"screen_id", "action", "target"});
  out.screen_id = ctx.at("screen_id").string(ctx.require(j, "screen_id"));
  read(ctx.require(j, "action"), ctx.at("action"), out.action);
  out.target.clear();
  if (const json* t = ctx.optional(j, "target")) out.target = ctx.at("target").string(*t);
}

void read(const json& j, const DecodeCtx& ctx, StepGroundTruth& out) {
  ctx.object(j);
  ctx.check_keys(j, {"a_gt", "valid_regions", "terminal"});
  read(ctx.require(j, "a_gt"), ctx.at("a_gt"), out.a_gt);
  const auto regions_ctx = ctx.at("valid_regions");
  const json& regions = regions_ctx.array(ctx.require(j, "valid_regions"));
  out.valid_regions.clear();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    out.valid_regions.push_back(regions_ctx.at(i).string(regions[i]));
  }
  out.terminal = ctx.at("terminal").boolean(ctx.require(j, "terminal"));
}

void read(const json& j, const DecodeCtx& ctx, StepContext& out) {
  ctx.object(j);
  ctx.check_keys(j, {"instruction", "screen", "history", "step_index"});
  read(ctx.require(j, "instruction"), ctx.at("instruction"), out.instruction);
  read(ctx.require(j, "screen"), ctx.at("screen"), out.screen);
  out.history = decode_list<HistoryEntry>(ctx.require(j, "history"), ctx.at("history"));
  out.step_index = static_cast<int>(ctx.at("step_index").integer(ctx.require(j, "step_index")));
}

void read(const json& j, const DecodeCtx& ctx, Trajectory& out) {
  ctx.object(j);
  ctx.check_keys(j, {"task", "steps", "app"});
  read(ctx.require(j, "task"), ctx.at("task"), out.task);
  out.app = ctx.at("app").string(ctx.require(j, "app"));
  const auto steps_ctx = ctx.at("steps");
  const json& steps = steps_ctx.array(ctx.require(j, "steps"));
  out.steps.assign(steps.size(), {});
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto sc = steps_ctx.at(i);
    sc.object(steps[i]);
    sc.check_keys(steps[i], {"screen", "ground_truth"});
    read(sc.require(steps[i], "screen"), sc.at("screen"), out.steps[i].screen);
    read(sc.require(steps[i], "ground_truth"), sc.at("ground_truth"), out.steps[i].ground_truth);
  }
}

void read(const json& j, const DecodeCtx& ctx, RewardSample& out) {
  ctx.object(j);
  ctx.check_keys(j, {"id", "context", "candidate", "label", "tier", "source", "split",
                     "failure_axis"});
  out.id = ctx.at("id").string(ctx.require(j, "id"));
  read(ctx.require(j, "context"), ctx.at("context"), out.context);
  read(ctx.require(j, "candidate"), ctx.at("candidate"), out.candidate);
  out.label = ctx.at("label").binary(ctx.require(j, "label"));
  out.tier = ctx.at("tier").enumeration<DifficultyTier>(ctx.require(j, "tier"));
  out.source = ctx.at("source").enumeration<SampleSource>(ctx.require(j, "source"));
  out.split = ctx.at("split").enumeration<Split>(ctx.require(j, "split"));
  out.failure_axis.reset();
  if (const json* a = ctx.optional(j, "failure_axis")) {
    out.failure_axis = ctx.at("failure_axis").enumeration<FailureAxis>(*a);
  }
}

void read(const json& j, const DecodeCtx& ctx, EokNode& out) {
  ctx.object(j);
  ctx.check_keys(j, {"id", "action_type", "target_descriptor"});
  out.id = ctx.at("id").string(ctx.require(j, "id"));
  out.action_type = ctx.at("action_type").enumeration<ActionType>(ctx.require(j, "action_type"));
  out.target_descriptor =
      ctx.at("target_descriptor").string(ctx.require(j, "target_descriptor"));
}

void read(const json& j, const DecodeCtx& ctx, EokGraph& out) {
  ctx.object(j);
  ctx.check_keys(j, {"pattern_id", "nodes", "edges"});
  out.pattern_id = ctx.at("pattern_id").string(ctx.require(j, "pattern_id"));
  out.nodes = decode_list<EokNode>(ctx.require(j, "nodes"), ctx.at("nodes"));
  const auto edges_ctx = ctx.at("edges");
  const json& edges = edges_ctx.array(ctx.require(j, "edges"));
  out.edges.clear();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto ec = edges_ctx.at(i);
    const json& e = ec.array(edges[i]);
    if (e.size() != 2) ec.fail("expected an [from, to] pair");
    out.edges.emplace_back(ec.at(std::size_t{0}).string(e[0]), ec.at(std::size_t{1}).string(e[1]));
  }
}

// ---------------------------------------------------------------------------

std::string dump_canonical(const json& j) { return j.dump(); }

json parse_json(std::string_view text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<record>", std::string("malformed JSON: ") + e.what(), line);
  }
}

std::vector<JsonLine> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<JsonLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back({n, parse_json(line, n)});
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& r : records) out << dump_canonical(r) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace rms
