#include "rms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace rms {

bool type_match(const Action& a_pred, const Action& a_gt) noexcept {
  return a_pred.type() == a_gt.type();
}

bool exact_match(const Action& a_pred, const Action& a_gt, const ScreenState& screen,
                 std::span<const std::string> valid_regions, const ExactMatchConfig& config) {
  if (!type_match(a_pred, a_gt)) return false;

  if (const auto p = a_pred.point()) {
    std::vector<const UiElement*> boxes;
    for (const auto& id : valid_regions) {
      if (const UiElement* e = screen.find(id)) boxes.push_back(e);
    }
    if (!boxes.empty()) {
      if (std::none_of(boxes.begin(), boxes.end(),
                       [&](const UiElement* e) { return e->box.contains(*p); })) {
        return false;
      }
    } else if (const auto g = a_gt.point()) {
      if (std::hypot(p->u - g->u, p->v - g->v) > config.fallback_radius) return false;
    }
  }

  if (const auto* p = a_pred.get_if<act::InputText>()) {
    return texts_equivalent(p->text, a_gt.get_if<act::InputText>()->text, config.text);
  }
  if (const auto* p = a_pred.get_if<act::Swipe>()) {
    return p->direction == a_gt.get_if<act::Swipe>()->direction;
  }
  if (const auto* p = a_pred.get_if<act::OpenApp>()) {
    return texts_equivalent(p->name, a_gt.get_if<act::OpenApp>()->name, config.text);
  }
  return true;
}

std::string_view to_string(Stratum s) noexcept {
  switch (s) {
    case Stratum::easy: return "Easy";
    case Stratum::moderate: return "Moderate";
    case Stratum::hard: return "Hard";
  }
  return "?";
}

template <>
std::optional<Stratum> enum_from_string<Stratum>(std::string_view s) noexcept {
  if (s == "Easy") return Stratum::easy;
  if (s == "Moderate") return Stratum::moderate;
  if (s == "Hard") return Stratum::hard;
  return std::nullopt;
}

Stratum stratum_of(const RewardSample& s) noexcept {
  switch (s.tier) {
    case DifficultyTier::easy_negative: return Stratum::easy;
    case DifficultyTier::moderate_negative: return Stratum::moderate;
    case DifficultyTier::hard_negative: return Stratum::hard;
    case DifficultyTier::positive: break;
  }
  switch (s.source) {
    case SampleSource::instruction_substitution:
    case SampleSource::trajectory_stitching: return Stratum::easy;
    case SampleSource::os_agent_intent_error:
    case SampleSource::os_agent_repaired: return Stratum::moderate;
    case SampleSource::rule_verified: return Stratum::hard;
  }
  return Stratum::easy;
}

// ---------------------------------------------------------------------------
// Rows

json encode(const MetricRow& r) {
  json j = {{"model", r.model},
            {"split", r.split},
            {"metric", r.metric},
            {"value", r.value},
            {"n", r.n}};
  if (r.stratum) j["stratum"] = to_string(*r.stratum);
  if (r.round) j["round"] = *r.round;
  return j;
}

void read(const json& j, const DecodeCtx& ctx, MetricRow& out) {
  ctx.object(j);
  ctx.check_keys(j, {"model", "split", "stratum", "metric", "value", "n", "round"});
  out.model = ctx.at("model").string(ctx.require(j, "model"));
  out.split = ctx.at("split").string(ctx.require(j, "split"));
  if (out.split != "ALL" && out.split != "IDD" && out.split != "OOD") {
    ctx.at("split").fail("unknown value '" + out.split + "'");
  }
  out.stratum.reset();
  if (const json* s = ctx.optional(j, "stratum")) out.stratum = ctx.at("stratum").enumeration<Stratum>(*s);
  out.metric = ctx.at("metric").string(ctx.require(j, "metric"));
  out.value = ctx.at("value").number(ctx.require(j, "value"));
  const long long n = ctx.at("n").integer(ctx.require(j, "n"));
  if (n < 0) ctx.at("n").fail("must be non-negative");
  out.n = static_cast<std::size_t>(n);
  out.round.reset();
  if (const json* r = ctx.optional(j, "round")) out.round = static_cast<int>(ctx.at("round").integer(*r));
}

void CellCounter::add(Split s, bool correct) {
  if (s == Split::idd) {
    idd_correct += correct ? 1 : 0;
    ++idd_total;
  } else {
    ood_correct += correct ? 1 : 0;
    ++ood_total;
  }
}

void CellCounter::emit(std::vector<MetricRow>& out, const std::string& model,
                       const std::string& metric, std::optional<Stratum> stratum,
                       std::optional<int> round) const {
  auto push = [&](const char* split, std::size_t c, std::size_t n) {
    if (n == 0) return;
    out.push_back({model, split, stratum, metric,
                   100.0 * static_cast<double>(c) / static_cast<double>(n), n, round});
  };
  push("ALL", idd_correct + ood_correct, idd_total + ood_total);
  push("IDD", idd_correct, idd_total);
  push("OOD", ood_correct, ood_total);
}

std::vector<MetricRow> discrimination_accuracy(const std::string& model,
                                               std::span<const bool> decisions,
                                               std::span<const RewardSample> samples) {
  if (decisions.size() != samples.size()) {
    throw std::invalid_argument("discrimination_accuracy: " + std::to_string(decisions.size()) +
                                " decisions for " + std::to_string(samples.size()) + " samples");
  }
  CellCounter overall;
  std::array<CellCounter, 3> strata;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const bool hit = decisions[i] == samples[i].label;
    overall.add(samples[i].split, hit);
    strata[static_cast<std::size_t>(stratum_of(samples[i]))].add(samples[i].split, hit);
  }
  std::vector<MetricRow> rows;
  overall.emit(rows, model, "DiscAcc", std::nullopt);
  for (Stratum s : {Stratum::easy, Stratum::moderate, Stratum::hard}) {
    strata[static_cast<std::size_t>(s)].emit(rows, model, "DiscAcc", s);
  }
  return rows;
}

std::vector<MetricRow> step_sr_rows(const std::string& model, std::span<const StepResult> steps,
                                    std::optional<int> round) {
  CellCounter c;
  for (const auto& s : steps) c.add(s.split, s.correct);
  std::vector<MetricRow> rows;
  c.emit(rows, model, "StepSR", std::nullopt, round);
  return rows;
}

std::vector<MetricRow> match_rows(const std::string& model, std::span<const MatchCase> cases,
                                  const ExactMatchConfig& config) {
  CellCounter tm, em;
  static const ScreenState kEmpty;
  for (const auto& c : cases) {
    tm.add(c.split, type_match(c.a_pred, c.a_gt));
    em.add(c.split, exact_match(c.a_pred, c.a_gt, c.screen ? *c.screen : kEmpty, c.valid_regions,
                                config));
  }
  std::vector<MetricRow> rows;
  tm.emit(rows, model, "TM", std::nullopt);
  em.emit(rows, model, "EM", std::nullopt);
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

int split_rank(const std::string& s) { return s == "ALL" ? 0 : s == "IDD" ? 1 : 2; }
int stratum_rank(const std::optional<Stratum>& s) { return s ? 1 + static_cast<int>(*s) : 0; }
int round_rank(const std::optional<int>& r) { return r ? 1 + *r : 0; }

auto row_key(const MetricRow& r) {
  return std::make_tuple(r.model, r.metric, round_rank(r.round), stratum_rank(r.stratum),
                         split_rank(r.split));
}

std::string cell_name(const MetricRow& r) {
  std::string s = r.model + " " + r.metric;
  if (r.round) s += " round " + std::to_string(*r.round);
  if (r.stratum) s += " " + std::string(to_string(*r.stratum));
  return s;
}

}  // namespace

void check_consistency(std::span<const MetricRow> rows) {
  std::map<std::tuple<std::string, std::string, int, int>, std::array<const MetricRow*, 3>> groups;
  for (const auto& r : rows) {
    if (!(r.value >= 0.0 && r.value <= 100.0)) {
      throw ReportConsistencyError(cell_name(r) + " " + r.split + ": value " +
                                   std::to_string(r.value) + " outside [0, 100]");
    }
    auto& slot = groups[{r.model, r.metric, round_rank(r.round), stratum_rank(r.stratum)}]
                       [static_cast<std::size_t>(split_rank(r.split))];
    if (slot != nullptr) throw ReportConsistencyError(cell_name(r) + " " + r.split + ": duplicate row");
    slot = &r;
  }
  for (const auto& [key, cells] : groups) {
    const MetricRow* all = cells[0];
    if (all == nullptr || (cells[1] == nullptr && cells[2] == nullptr)) continue;
    double weighted = 0.0;
    std::size_t n = 0;
    for (const MetricRow* part : {cells[1], cells[2]}) {
      if (part == nullptr) continue;
      weighted += part->value * static_cast<double>(part->n);
      n += part->n;
    }
    if (n != all->n) {
      throw ReportConsistencyError(cell_name(*all) + ": ALL n=" + std::to_string(all->n) +
                                   " but IDD+OOD n=" + std::to_string(n));
    }
    const double expected = n == 0 ? 0.0 : weighted / static_cast<double>(n);
    if (std::abs(expected - all->value) > kConsistencyTolerance * std::max(1.0, expected)) {
      throw ReportConsistencyError(cell_name(*all) + ": ALL=" + std::to_string(all->value) +
                                   " but weighted IDD/OOD mean is " + std::to_string(expected));
    }
  }
}

std::vector<MetricRow> sorted_rows(std::vector<MetricRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MetricRow& a, const MetricRow& b) { return row_key(a) < row_key(b); });
  return rows;
}

json aggregate_report(std::vector<MetricRow> rows, const json& manifest) {
  rows = sorted_rows(std::move(rows));
  check_consistency(rows);
  json out = {{"no_data", rows.empty()}, {"rows", json::array()}};
  for (const auto& r : rows) out["rows"].push_back(encode(r));
  if (!manifest.is_null()) out["manifest"] = manifest;
  return out;
}

std::vector<MetricRow> report_rows(const json& report) {
  if (!report.is_object() || !report.contains("rows")) return {};
  return decode_list<MetricRow>(report.at("rows"), DecodeCtx("rows"));
}

std::string render_text(const json& report) {
  const auto rows = report_rows(report);
  if (rows.empty()) return "no data\n";

  std::ostringstream out;
  std::size_t i = 0;
  char buf[64];
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].model == rows[i].model && rows[j].metric == rows[i].metric) ++j;
    if (out.tellp() > 0) out << '\n';
    out << rows[i].model << " / " << rows[i].metric << " (%)\n";
    std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s %8s\n", "", "ALL", "IDD", "OOD", "n");
    out << buf;
    std::size_t k = i;
    while (k < j) {
      std::size_t m = k;
      std::array<const MetricRow*, 3> cells{};
      while (m < j && rows[m].round == rows[k].round && rows[m].stratum == rows[k].stratum) {
        cells[static_cast<std::size_t>(split_rank(rows[m].split))] = &rows[m];
        ++m;
      }
      std::string label = rows[k].round ? "Round " + std::to_string(*rows[k].round)
                          : rows[k].stratum ? std::string(to_string(*rows[k].stratum))
                                            : "Overall";
      std::snprintf(buf, sizeof buf, "%-12s", label.c_str());
      out << buf;
      for (const MetricRow* c : cells) {
        if (c != nullptr) std::snprintf(buf, sizeof buf, " %8.1f", c->value);
        else std::snprintf(buf, sizeof buf, " %8s", "-");
        out << buf;
      }
      std::snprintf(buf, sizeof buf, " %8zu\n", cells[0] ? cells[0]->n : 0);
      out << buf;
      k = m;
    }
    i = j;
  }
  return out.str();
}

std::string render_csv(const json& report) {
  std::ostringstream out;
  out << "model,metric,round,stratum,split,value,n\n";
  char buf[32];
  for (const auto& r : report_rows(report)) {
    std::snprintf(buf, sizeof buf, "%.6f", r.value);
    out << r.model << ',' << r.metric << ',' << (r.round ? std::to_string(*r.round) : "") << ','
        << (r.stratum ? std::string(to_string(*r.stratum)) : "") << ',' << r.split << ',' << buf
        << ',' << r.n << '\n';
  }
  return out.str();
}

}  // namespace rms
