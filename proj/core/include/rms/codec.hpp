#pragma once

// Canonical record encoding: one JSON object per line, field names exactly as
// the domain types name them. Decoding is schema-checked; in strict mode
// unknown fields are rejected, in lenient mode they are ignored.

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rms/eok.hpp"
#include "rms/types.hpp"

namespace rms {

using json = nlohmann::json;

struct DecodeOptions {
  bool strict = true;
};

/// Schema or syntax error. `field` is a dotted path ("action.type",
/// "context.screen.elements[2].box"); `line` is 1-based within a JSONL file,
/// 0 when decoding a standalone value.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, std::string message, std::size_t line = 0);

  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }
  std::size_t line() const noexcept { return line_; }
  ParseError at_line(std::size_t line) const { return ParseError(field_, detail_, line); }

 private:
  std::string field_;
  std::string detail_;
  std::size_t line_;
};

/// Decoding cursor: remembers the path to the current value.
class DecodeCtx {
 public:
  explicit DecodeCtx(std::string path, DecodeOptions opts = {})
      : path_(std::move(path)), opts_(opts) {}

  DecodeCtx at(std::string_view key) const;
  DecodeCtx at(std::size_t index) const;
  const std::string& path() const noexcept { return path_; }
  const DecodeOptions& options() const noexcept { return opts_; }

  [[noreturn]] void fail(const std::string& message) const;

  const json& object(const json& j) const;
  const json& require(const json& obj, std::string_view key) const;
  const json* optional(const json& obj, std::string_view key) const;
  /// Strict mode: rejects keys outside `allowed`.
  void check_keys(const json& obj, std::initializer_list<std::string_view> allowed) const;

  std::string string(const json& j) const;
  double number(const json& j) const;
  long long integer(const json& j) const;
  bool boolean(const json& j) const;
  /// 0/1 integer or JSON boolean.
  bool binary(const json& j) const;
  const json& array(const json& j) const;

  template <class E>
  E enumeration(const json& j) const {
    auto s = string(j);
    auto e = enum_from_string<E>(s);
    if (!e) fail("unknown value '" + s + "'");
    return *e;
  }

 private:
  std::string path_;
  DecodeOptions opts_;
};

// Encoding ------------------------------------------------------------------

json encode(const Point& p);
json encode(const Box& b);
json encode(const UiElement& e);
json encode(const ScreenState& s);
json encode(const TaskInstruction& t);
json encode(const Action& a);
json encode(const HistoryEntry& h);
json encode(const StepGroundTruth& gt);
json encode(const StepContext& c);
json encode(const Trajectory& t);
json encode(const RewardSample& s);
json encode(const EokNode& n);
json encode(const EokGraph& g);

// Decoding ------------------------------------------------------------------

void read(const json& j, const DecodeCtx& ctx, Point& out);
void read(const json& j, const DecodeCtx& ctx, Box& out);
void read(const json& j, const DecodeCtx& ctx, UiElement& out);
void read(const json& j, const DecodeCtx& ctx, ScreenState& out);
void read(const json& j, const DecodeCtx& ctx, TaskInstruction& out);
void read(const json& j, const DecodeCtx& ctx, Action& out);
void read(const json& j, const DecodeCtx& ctx, HistoryEntry& out);
void read(const json& j, const DecodeCtx& ctx, StepGroundTruth& out);
void read(const json& j, const DecodeCtx& ctx, StepContext& out);
void read(const json& j, const DecodeCtx& ctx, Trajectory& out);
void read(const json& j, const DecodeCtx& ctx, RewardSample& out);
void read(const json& j, const DecodeCtx& ctx, EokNode& out);
void read(const json& j, const DecodeCtx& ctx, EokGraph& out);

/// Root path used in error messages when decoding a standalone T.
template <class T>
std::string_view record_name();

template <> inline std::string_view record_name<Point>() { return "point"; }
template <> inline std::string_view record_name<Box>() { return "box"; }
template <> inline std::string_view record_name<UiElement>() { return "element"; }
template <> inline std::string_view record_name<ScreenState>() { return "screen"; }
template <> inline std::string_view record_name<TaskInstruction>() { return "instruction"; }
template <> inline std::string_view record_name<Action>() { return "action"; }
template <> inline std::string_view record_name<HistoryEntry>() { return "history"; }
template <> inline std::string_view record_name<StepGroundTruth>() { return "ground_truth"; }
template <> inline std::string_view record_name<StepContext>() { return "context"; }
template <> inline std::string_view record_name<Trajectory>() { return "trajectory"; }
template <> inline std::string_view record_name<RewardSample>() { return "sample"; }
template <> inline std::string_view record_name<EokNode>() { return "node"; }
template <> inline std::string_view record_name<EokGraph>() { return "eok"; }

template <class T>
T decode(const json& j, DecodeOptions opts = {}) {
  T out{};
  read(j, DecodeCtx(std::string(record_name<T>()), opts), out);
  return out;
}

template <class T>
std::vector<T> decode_list(const json& j, const DecodeCtx& ctx) {
  const json& arr = ctx.array(j);
  std::vector<T> out(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) read(arr[i], ctx.at(i), out[i]);
  return out;
}

// JSON lines ------------------------------------------------------------------

/// Compact, key-sorted serialization. Byte-stable for equal values.
std::string dump_canonical(const json& j);

json parse_json(std::string_view text, std::size_t line = 0);

struct JsonLine {
  std::size_t line = 0;
  json value;
};

/// Blank lines are skipped; each record keeps its 1-based file line.
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Decode every line of a JSONL file; ParseErrors carry the line number.
template <class T>
std::vector<T> read_records(const std::filesystem::path& path, DecodeOptions opts = {}) {
  const auto lines = read_jsonl(path);
  std::vector<T> out;
  out.reserve(lines.size());
  for (const auto& [line, value] : lines) {
    try {
      out.push_back(decode<T>(value, opts));
    } catch (const ParseError& e) {
      throw e.at_line(line);
    }
  }
  return out;
}

template <class T>
void write_records(const std::filesystem::path& path, const std::vector<T>& items) {
  std::vector<json> lines;
  lines.reserve(items.size());
  for (const auto& item : items) lines.push_back(encode(item));
  write_jsonl(path, lines);
}

}  // namespace rms
