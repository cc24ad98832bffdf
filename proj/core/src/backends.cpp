#include "rms/backends.hpp"

#include <algorithm>

#include "rms/rng.hpp"

namespace rms {

std::string_view to_string(Preference p) noexcept {
  return p == Preference::prefer_pred ? "prefer_pred" : "prefer_corr";
}

template <>
std::optional<Preference> enum_from_string<Preference>(std::string_view s) noexcept {
  if (s == "prefer_pred") return Preference::prefer_pred;
  if (s == "prefer_corr") return Preference::prefer_corr;
  return std::nullopt;
}

Violations validate(const DsVerdict& v) {
  Violations out;
  if (v.y_ds && v.a_corr) out.push_back("a_corr: must be absent when y_ds = 1");
  if (v.a_corr.has_value() != v.r_corr.has_value()) {
    out.push_back("r_corr: must be present exactly when a_corr is present");
  }
  if (v.a_corr) {
    for (auto& m : validate(*v.a_corr)) out.push_back("a_corr." + m);
  }
  return out;
}

Violations validate(const GpVerdict& v, const GpInput& in) {
  Violations out;
  for (auto& m : validate(in.ds)) out.push_back("ds." + m);
  if (v.s_gp.preference == Preference::prefer_corr && !in.ds.a_corr) {
    out.push_back("s_gp.preference: prefer_corr without a_corr");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Codec

namespace {

void put_verdict(json& j, const DsVerdict& v) {
  j["y_ds"] = v.y_ds ? 1 : 0;
  j["r_ds"] = v.r_ds;
  if (v.a_corr) j["a_corr"] = encode(*v.a_corr);
  if (v.r_corr) j["r_corr"] = *v.r_corr;
}

void take_verdict(const json& j, const DecodeCtx& ctx, DsVerdict& out) {
  out.y_ds = ctx.at("y_ds").binary(ctx.require(j, "y_ds"));
  out.r_ds = ctx.at("r_ds").string(ctx.require(j, "r_ds"));
  out.a_corr.reset();
  out.r_corr.reset();
  if (const json* a = ctx.optional(j, "a_corr")) {
    Action act;
    read(*a, ctx.at("a_corr"), act);
    out.a_corr = std::move(act);
  }
  if (const json* r = ctx.optional(j, "r_corr")) out.r_corr = ctx.at("r_corr").string(*r);
  if (out.y_ds && out.a_corr) ctx.at("a_corr").fail("must be absent when y_ds = 1");
  if (out.a_corr.has_value() != out.r_corr.has_value()) {
    ctx.at("r_corr").fail("must be present exactly when a_corr is present");
  }
}

}  // namespace

json encode(const DsInput& v) { return {{"context", encode(v.context)}, {"a_pred", encode(v.a_pred)}}; }

json encode(const DsVerdict& v) {
  json j = json::object();
  put_verdict(j, v);
  return j;
}

json encode(const GpInput& v) {
  json j = {{"context", encode(v.context)}, {"a_pred", encode(v.a_pred)}};
  put_verdict(j, v.ds);
  return j;
}

json encode(const GpVerdict& v) {
  return {{"y_gp", v.y_gp ? 1 : 0},
          {"e_gp", v.e_gp ? 1 : 0},
          {"s_gp", {{"preference", to_string(v.s_gp.preference)}, {"intent", v.s_gp.intent}}}};
}

void read(const json& j, const DecodeCtx& ctx, DsInput& out) {
  ctx.object(j);
  ctx.check_keys(j, {"context", "a_pred"});
  read(ctx.require(j, "context"), ctx.at("context"), out.context);
  read(ctx.require(j, "a_pred"), ctx.at("a_pred"), out.a_pred);
}

void read(const json& j, const DecodeCtx& ctx, DsVerdict& out) {
  ctx.object(j);
  ctx.check_keys(j, {"y_ds", "r_ds", "a_corr", "r_corr"});
  take_verdict(j, ctx, out);
}

void read(const json& j, const DecodeCtx& ctx, GpInput& out) {
  ctx.object(j);
  ctx.check_keys(j, {"context", "a_pred", "y_ds", "r_ds", "a_corr", "r_corr"});
  read(ctx.require(j, "context"), ctx.at("context"), out.context);
  read(ctx.require(j, "a_pred"), ctx.at("a_pred"), out.a_pred);
  take_verdict(j, ctx, out.ds);
}

void read(const json& j, const DecodeCtx& ctx, GpVerdict& out) {
  ctx.object(j);
  ctx.check_keys(j, {"y_gp", "e_gp", "s_gp"});
  out.y_gp = ctx.at("y_gp").binary(ctx.require(j, "y_gp"));
  out.e_gp = ctx.at("e_gp").binary(ctx.require(j, "e_gp"));
  const auto sc = ctx.at("s_gp");
  const json& s = sc.object(ctx.require(j, "s_gp"));
  sc.check_keys(s, {"preference", "intent"});
  out.s_gp.preference = sc.at("preference").enumeration<Preference>(sc.require(s, "preference"));
  out.s_gp.intent.clear();
  if (const json* i = sc.optional(s, "intent")) out.s_gp.intent = sc.at("intent").string(*i);
}

// ---------------------------------------------------------------------------
// Noise

std::string pattern_key(FailureAxis axis, ActionType type) {
  return std::string(to_string(axis)) + "/" + std::string(to_string(type));
}

double NoiseSchedule::rate(const std::string& pattern) const {
  auto it = rates.find(pattern);
  return it == rates.end() ? base_rate : it->second;
}

void NoiseSchedule::reduce(const std::string& pattern, double factor) {
  rates[pattern] = rate(pattern) * (1.0 - factor);
}

json encode(const NoiseSchedule& n) { return {{"base_rate", n.base_rate}, {"rates", n.rates}}; }

NoiseSchedule noise_from_json(const json& j) {
  NoiseSchedule n;
  if (j.is_number()) {
    n.base_rate = j.get<double>();
  } else if (j.is_object()) {
    n.base_rate = j.value("base_rate", 0.0);
    if (j.contains("rates")) n.rates = j["rates"].get<std::map<std::string, double>>();
  } else {
    throw ConfigError("noise: expected a rate or {base_rate, rates}");
  }
  auto check = [](double r, const std::string& what) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(what + ": must be in [0, 1]");
  };
  check(n.base_rate, "noise.base_rate");
  for (const auto& [k, r] : n.rates) check(r, "noise.rates." + k);
  return n;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

std::uint64_t context_key(std::uint64_t seed, std::string_view role, const StepContext& c,
                          const Action& a) {
  return KeyHasher(seed)
      .add(role)
      .add(c.instruction.id)
      .add(static_cast<std::uint64_t>(c.step_index))
      .add(dump_canonical(encode(a)))
      .value();
}

double unit_of(std::uint64_t key) { return KeyHasher(key).unit(); }

}  // namespace

bool action_correct(const World& world, const StepContext& context, const Action& a, bool use_eok,
                    TextPolicy text) {
  const StepRef ref = world.lookup(context.instruction.id, context.step_index);
  return verify(context, ref.ground_truth(), a, use_eok ? ref.eok : nullptr, {text}).passed;
}

OracleDsBackend::OracleDsBackend(const World& world, OracleDsConfig config)
    : world_(world), config_(std::move(config)) {}

VerificationResult OracleDsBackend::truth(const DsInput& input) const {
  const StepRef ref = world_.lookup(input.context.instruction.id, input.context.step_index);
  return verify(input.context, ref.ground_truth(), input.a_pred,
                config_.use_eok ? ref.eok : nullptr, {config_.intention.text});
}

DsVerdict OracleDsBackend::ds_evaluate(const DsInput& input) const {
  const StepRef ref = world_.lookup(input.context.instruction.id, input.context.step_index);
  const auto& gt = ref.ground_truth();
  const EokGraph* eok = config_.use_eok ? ref.eok : nullptr;
  const VerifierConfig vc{config_.intention.text};
  const auto v = verify(input.context, gt, input.a_pred, eok, vc);

  const std::string pattern = pattern_key(v.failure_or_none(), input.a_pred.type());
  const double u = unit_of(context_key(config_.seed, "ds", input.context, input.a_pred));
  const bool flip = u < config_.noise.rate(pattern);

  DsVerdict out;
  out.y_ds = v.passed != flip;
  if (out.y_ds) {
    out.r_ds = "all rules satisfied";
    return out;
  }
  out.r_ds = v.passed ? "rejected: action judged inconsistent with the task"
                      : "rejected on " + std::string(to_string(*v.failed_axis)) + " axis: " + v.reason;
  const std::string axis(to_string(v.failure_or_none()));

  if (input.a_pred.point() &&
      match_intention(input.a_pred, gt, input.context.screen, config_.intention) ==
          Intention::correct_intent) {
    const Action repaired = repair_grounding(input.a_pred, gt, input.context.screen);
    if (verify(input.context, gt, repaired, eok, vc).passed) {
      out.a_corr = repaired;
      out.r_corr = "grounding repaired to the nearest valid region (" + axis + " axis)";
      return out;
    }
  }
  out.a_corr = gt.a_gt;
  out.r_corr = "intent override: replaced by the reference action (" + axis + " axis)";
  return out;
}

OracleGpBackend::OracleGpBackend(const World& world, OracleGpConfig config)
    : world_(world), config_(std::move(config)) {}

GpVerdict OracleGpBackend::gp_evaluate(const GpInput& input) const {
  const StepRef ref = world_.lookup(input.context.instruction.id, input.context.step_index);
  const auto& gt = ref.ground_truth();
  const EokGraph* eok = config_.use_eok ? ref.eok : nullptr;
  const VerifierConfig vc{config_.text};
  const bool pred_ok = verify(input.context, gt, input.a_pred, eok, vc).passed;
  const bool corr_ok =
      input.ds.a_corr && verify(input.context, gt, *input.ds.a_corr, eok, vc).passed;

  GpVerdict out;
  out.y_gp = input.ds.y_ds == pred_ok;
  out.s_gp.preference =
      !pred_ok && corr_ok ? Preference::prefer_corr : Preference::prefer_pred;

  if (config_.noise_rate > 0.0 &&
      unit_of(context_key(config_.seed, "gp", input.context, input.a_pred)) < config_.noise_rate) {
    out.y_gp = !out.y_gp;
    if (input.ds.a_corr) {
      out.s_gp.preference = out.s_gp.preference == Preference::prefer_pred
                                ? Preference::prefer_corr
                                : Preference::prefer_pred;
    }
  }

  const Action& endorsed =
      out.s_gp.preference == Preference::prefer_corr ? *input.ds.a_corr : input.a_pred;
  out.e_gp = gt.terminal && endorsed.type() == ActionType::complete;
  out.s_gp.intent = "step " + std::to_string(input.context.step_index) + " of '" +
                    input.context.instruction.text + "' calls for " +
                    std::string(to_string(gt.a_gt.type()));
  return out;
}

}  // namespace rms
