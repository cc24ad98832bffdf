#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "rms/codec.hpp"
#include "rms/text.hpp"
#include "rms/validate.hpp"

namespace rms {
namespace {

using testing::EntityGen;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

TEST(Validate, InvertedBoxNamesBothAxes) {
  UiElement e{"btn", {0.4, 0.3, 0.2, 0.2}, Role::button, "OK", true};
  EXPECT_EQ(validate(e), (Violations{"box: x0 ≥ x1", "box: y0 ≥ y1"}));
}

TEST(Validate, WellFormedScreenHasNoViolations) {
  ScreenState s;
  s.screen_id = "home";
  s.elements = {{"a", {0.0, 0.0, 0.5, 0.5}, Role::button, "A", true},
                {"b", {0.5, 0.5, 1.0, 1.0}, Role::icon, std::nullopt, true},
                {"c", {0.1, 0.6, 0.3, 0.9}, Role::text_field, "Name", true}};
  EXPECT_TRUE(validate(s).empty());
}

TEST(Validate, LabelTierMismatch) {
  EntityGen gen(3);
  RewardSample s = gen.sample();
  s.label = true;
  s.tier = DifficultyTier::hard_negative;
  s.failure_axis = FailureAxis::none;
  EXPECT_EQ(validate(s), (Violations{"label/tier inconsistent"}));
}

TEST(Validate, LabelAxisMismatch) {
  EntityGen gen(4);
  RewardSample s = gen.sample();
  s.label = false;
  s.tier = DifficultyTier::easy_negative;
  s.failure_axis = FailureAxis::none;
  EXPECT_EQ(validate(s), (Violations{"label/failure_axis inconsistent"}));
}

TEST(Validate, HistoryLengthMustMatchStepIndex) {
  EntityGen gen(5);
  StepContext c = gen.context();
  c.step_index = static_cast<int>(c.history.size()) + 2;
  const auto v = validate(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "history: length must equal step_index − 1");
}

TEST(Validate, OnlyLastStepMayBeTerminal) {
  EntityGen gen(6);
  Trajectory t = gen.trajectory();
  while (t.steps.size() < 2) t = gen.trajectory();
  t.steps[0].ground_truth.terminal = true;
  t.steps[0].ground_truth.a_gt = Action::complete();
  const auto v = validate(t);
  EXPECT_NE(std::find(v.begin(), v.end(), "steps[0].ground_truth.terminal: only the last step may be terminal"),
            v.end());
}

TEST(Validate, RegionsMustResolveOnScreen) {
  ScreenState s;
  s.screen_id = "s";
  s.elements = {{"a", {0.0, 0.0, 1.0, 1.0}, Role::panel, std::nullopt, false}};
  StepGroundTruth gt{Action::back(), {"missing"}, false};
  EXPECT_THAT(validate(gt, s), ElementsAre("valid_regions: 'missing' not on screen 's'"));
}

TEST(Validate, EokCycleAndDanglingEdge) {
  EokGraph cyclic = testing::charging_station_graph();
  cyclic.edges.emplace_back("category", "launch");
  EXPECT_THAT(validate(cyclic), ElementsAre(HasSubstr("cycle")));
  // a dangling edge makes cycle search meaningless, so only it is reported
  EokGraph dangling = cyclic;
  dangling.edges.emplace_back("launch", "ghost");
  EXPECT_THAT(validate(dangling), ElementsAre("edges: (launch, ghost) references an unknown node"));
  EXPECT_TRUE(validate(testing::charging_station_graph()).empty());
}

TEST(Validate, DuplicateInstructionIds) {
  std::vector<TaskInstruction> t{{"t1", "a", TaskLevel::high, "x"}, {"t1", "b", TaskLevel::low, "x"}};
  EXPECT_THAT(validate_unique_ids(t), ElementsAre("id: duplicate 't1'"));
}

TEST(Box, ContainmentIsBoundaryInclusive) {
  const Box b{0.2, 0.2, 0.4, 0.3};
  EXPECT_TRUE(b.contains({0.2, 0.2}));
  EXPECT_TRUE(b.contains({0.4, 0.3}));
  EXPECT_TRUE(b.contains({0.3, 0.25}));
  EXPECT_FALSE(b.contains({0.4 + 1e-12, 0.25}));
  EXPECT_DOUBLE_EQ(b.distance_to({0.3, 0.25}), 0.0);
  EXPECT_NEAR(b.distance_to({0.5, 0.25}), 0.1, 1e-12);
}

TEST(Action, PointAccessors) {
  EXPECT_EQ(Action::click(0.1, 0.2).point()->u, 0.1);
  EXPECT_FALSE(Action::swipe(Direction::up).point());
  EXPECT_FALSE(Action::back().point());
  EXPECT_EQ(Action::input_text("x").with_point({0.3, 0.4}), Action::input_text("x", Point{0.3, 0.4}));
  EXPECT_EQ(Action::home().with_point({0.3, 0.4}), Action::home());
}

TEST(Enums, WireNamesRoundTrip) {
  for (std::size_t i = 0; i < kActionTypeCount; ++i) {
    const auto t = static_cast<ActionType>(i);
    EXPECT_EQ(enum_from_string<ActionType>(to_string(t)), t);
  }
  for (auto a : {FailureAxis::type, FailureAxis::spatial, FailureAxis::semantic,
                 FailureAxis::prerequisite, FailureAxis::none}) {
    EXPECT_EQ(enum_from_string<FailureAxis>(to_string(a)), a);
  }
  EXPECT_FALSE(enum_from_string<Split>("train"));
}

TEST(Text, NormalizationRules) {
  EXPECT_EQ(normalize_text("  Paris "), "paris");
  EXPECT_EQ(normalize_text("New \t  York"), "new york");
  // Decomposed e + combining acute composes to the same text as U+00E9.
  EXPECT_TRUE(texts_equivalent("Cafe\xCC\x81", "caf\xC3\xA9"));
  EXPECT_FALSE(texts_equivalent("Paris", "paris", TextPolicy{.case_fold = false}));
  EXPECT_TRUE(texts_equivalent(" Paris", "Paris ", TextPolicy{.case_fold = false}));
}

// ---------------------------------------------------------------------------
// Codec

TEST(Codec, ClickRoundTrip) {
  const Action a = Action::click(0.5, 0.5);
  const json j = encode(a);
  EXPECT_EQ(j.dump(), R"({"point":{"u":0.5,"v":0.5},"type":"click"})");
  EXPECT_EQ(decode<Action>(j), a);
}

TEST(Codec, MissingTagNamesActionType) {
  try {
    decode<Action>(json{{"point", {{"u", 0.5}, {"v", 0.5}}}});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "action.type");
  }
}

TEST(Codec, NestedFieldPaths) {
  EntityGen gen(8);
  json j = encode(gen.sample());
  j["context"]["screen"]["elements"][0]["box"].erase("x1");
  try {
    decode<RewardSample>(j);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "sample.context.screen.elements[0].box.x1");
  }
}

TEST(Codec, StrictRejectsUnknownLenientIgnores) {
  json j = encode(Action::back());
  j["extra"] = 1;
  EXPECT_THROW(decode<Action>(j, {.strict = true}), ParseError);
  EXPECT_EQ(decode<Action>(j, {.strict = false}), Action::back());
}

TEST(Codec, UnknownEnumValue) {
  try {
    decode<Action>(json{{"type", "teleport"}});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "action.type");
  }
}

template <class T, class Make>
void expect_round_trip(Make make, int n) {
  for (int i = 0; i < n; ++i) {
    const T value = make();
    const json j = encode(value);
    const T back = decode<T>(parse_json(dump_canonical(j)));
    ASSERT_EQ(back, value) << dump_canonical(j);
    ASSERT_EQ(dump_canonical(encode(back)), dump_canonical(j));
  }
}

TEST(Codec, ThousandRandomEntitiesRoundTrip) {
  EntityGen gen(20240501);
  expect_round_trip<Action>([&] { return gen.action(); }, 1000);
  expect_round_trip<ScreenState>([&] { return gen.screen(); }, 1000);
  expect_round_trip<StepContext>([&] { return gen.context(); }, 1000);
  expect_round_trip<Trajectory>([&] { return gen.trajectory(); }, 1000);
  expect_round_trip<RewardSample>([&] { return gen.sample(); }, 1000);
  expect_round_trip<EokGraph>([&] { return gen.eok(); }, 1000);
}

TEST(Codec, GeneratedEntitiesAreValid) {
  EntityGen gen(99);
  for (int i = 0; i < 500; ++i) {
    const auto s = gen.sample();
    ASSERT_TRUE(validate(s).empty()) << dump_canonical(encode(s));
    const auto t = gen.trajectory();
    ASSERT_TRUE(validate(t).empty()) << dump_canonical(encode(t));
  }
}

TEST(Codec, JsonlErrorsCarryLineNumbers) {
  const auto path = std::filesystem::temp_directory_path() / "rms_codec_lines.jsonl";
  {
    std::ofstream f(path);
    f << dump_canonical(encode(Action::back())) << "\n\n";
    f << R"({"type":"click"})" << "\n";
  }
  try {
    read_records<Action>(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.field(), "action.point");
  }
  std::filesystem::remove(path);
}

TEST(Codec, SyntaxErrorIsParseError) {
  EXPECT_THROW(parse_json("{not json", 4), ParseError);
}

TEST(Codec, CanonicalDumpIsKeySorted) {
  const json j = json::parse(R"({"b":1,"a":{"d":2,"c":3}})");
  EXPECT_EQ(dump_canonical(j), R"({"a":{"c":3,"d":2},"b":1})");
}

}  // namespace
}  // namespace rms
