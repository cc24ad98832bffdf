#pragma once

// Action-match metrics, reward-model discrimination accuracy and the report
// tables built from them.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rms/codec.hpp"
#include "rms/text.hpp"
#include "rms/types.hpp"

namespace rms {

/// Same verdict as check_type_alignment.
bool type_match(const Action& a_pred, const Action& a_gt) noexcept;

struct ExactMatchConfig {
  /// Used for point actions when no valid regions are given.
  double fallback_radius = 0.04;
  TextPolicy text;
};

/// TM plus every parameter: point inside a valid region (or within the
/// fallback radius of a_gt's point), normalized text, direction, app name.
/// Region ids that do not resolve on `screen` are ignored.
bool exact_match(const Action& a_pred, const Action& a_gt, const ScreenState& screen,
                 std::span<const std::string> valid_regions, const ExactMatchConfig& config = {});

enum class Stratum { easy, moderate, hard };

std::string_view to_string(Stratum s) noexcept;
template <> std::optional<Stratum> enum_from_string<Stratum>(std::string_view) noexcept;

/// Negatives map by tier. Positives take the stratum of the pool they were
/// produced alongside: perturbation -> easy, OS-agent -> moderate,
/// rule-verified -> hard.
Stratum stratum_of(const RewardSample& s) noexcept;

struct MetricRow {
  std::string model;
  /// "ALL", "IDD" or "OOD".
  std::string split;
  std::optional<Stratum> stratum;
  /// "TM", "EM", "StepSR" or "DiscAcc".
  std::string metric;
  /// Percentage.
  double value = 0.0;
  std::size_t n = 0;
  /// Set for per-round rows.
  std::optional<int> round;
  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

json encode(const MetricRow& r);
void read(const json& j, const DecodeCtx& ctx, MetricRow& out);
template <> inline std::string_view record_name<MetricRow>() { return "row"; }

/// Pooled correct/total counts keyed by split; turned into ALL/IDD/OOD rows.
struct CellCounter {
  std::size_t idd_correct = 0, idd_total = 0, ood_correct = 0, ood_total = 0;
  void add(Split s, bool correct);
  /// Cells with no samples are omitted.
  void emit(std::vector<MetricRow>& out, const std::string& model, const std::string& metric,
            std::optional<Stratum> stratum, std::optional<int> round = std::nullopt) const;
};

/// decisions[i] is the model's accept/reject for samples[i]. Rows cover
/// split x {overall, easy, moderate, hard}. Throws std::invalid_argument on a
/// length mismatch.
std::vector<MetricRow> discrimination_accuracy(const std::string& model,
                                               std::span<const bool> decisions,
                                               std::span<const RewardSample> samples);

struct StepResult {
  Split split = Split::idd;
  bool correct = false;
};

std::vector<MetricRow> step_sr_rows(const std::string& model, std::span<const StepResult> steps,
                                    std::optional<int> round = std::nullopt);

struct MatchCase {
  Split split = Split::idd;
  Action a_pred;
  Action a_gt;
  const ScreenState* screen = nullptr;
  std::vector<std::string> valid_regions;
};

/// TM and EM rows per split.
std::vector<MetricRow> match_rows(const std::string& model, std::span<const MatchCase> cases,
                                  const ExactMatchConfig& config = {});

class ReportConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kConsistencyTolerance = 1e-9;

/// Throws ReportConsistencyError when a value leaves [0, 100] or an ALL cell
/// differs from the n-weighted mean of its IDD and OOD cells.
void check_consistency(std::span<const MetricRow> rows);

/// Canonical row order: model, metric, round, stratum (overall first), split.
std::vector<MetricRow> sorted_rows(std::vector<MetricRow> rows);

/// {"no_data": bool, "rows": [...], "manifest"?: ...}. Checks consistency.
json aggregate_report(std::vector<MetricRow> rows, const json& manifest = nullptr);

/// Plain-text tables: one per (model, metric); strata or rounds down the
/// side, ALL/IDD/OOD across. "no data" for an empty report.
std::string render_text(const json& report);
std::string render_csv(const json& report);

/// Rows of a report document.
std::vector<MetricRow> report_rows(const json& report);

}  // namespace rms
