#pragma once

// Evaluator contracts for the two reward models plus deterministic oracle
// implementations over a world's ground truth.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "rms/codec.hpp"
#include "rms/synth.hpp"
#include "rms/validate.hpp"
#include "rms/verifier.hpp"
#include "rms/world.hpp"

namespace rms {

// ---------------------------------------------------------------------------
// Reward

inline constexpr double kRewardMatch = 1.0;
inline constexpr double kRewardFalsePositive = -0.5;
inline constexpr double kRewardFalseNegative = -0.2;

/// Step reward for the domain-specific model's decision against ground truth.
constexpr double ds_reward(bool y_ds, bool y_gt) noexcept {
  if (y_ds == y_gt) return kRewardMatch;
  return y_ds ? kRewardFalsePositive : kRewardFalseNegative;
}

// ---------------------------------------------------------------------------
// Payloads

struct DsInput {
  StepContext context;
  Action a_pred;
  friend bool operator==(const DsInput&, const DsInput&) = default;
};

struct DsVerdict {
  bool y_ds = false;
  std::string r_ds;
  std::optional<Action> a_corr;
  std::optional<std::string> r_corr;
  friend bool operator==(const DsVerdict&, const DsVerdict&) = default;
};

enum class Preference { prefer_pred, prefer_corr };

struct GpPreference {
  Preference preference = Preference::prefer_pred;
  std::string intent;
  friend bool operator==(const GpPreference&, const GpPreference&) = default;
};

struct GpInput {
  StepContext context;
  Action a_pred;
  DsVerdict ds;
  friend bool operator==(const GpInput&, const GpInput&) = default;
};

struct GpVerdict {
  bool y_gp = false;
  bool e_gp = false;
  GpPreference s_gp;
  friend bool operator==(const GpVerdict&, const GpVerdict&) = default;
};

std::string_view to_string(Preference p) noexcept;
template <> std::optional<Preference> enum_from_string<Preference>(std::string_view) noexcept;

Violations validate(const DsVerdict& v);
/// Includes the check that prefer_corr only appears when a_corr exists.
Violations validate(const GpVerdict& v, const GpInput& in);

json encode(const DsInput& v);
json encode(const DsVerdict& v);
json encode(const GpInput& v);
json encode(const GpVerdict& v);
void read(const json& j, const DecodeCtx& ctx, DsInput& out);
void read(const json& j, const DecodeCtx& ctx, DsVerdict& out);
void read(const json& j, const DecodeCtx& ctx, GpInput& out);
void read(const json& j, const DecodeCtx& ctx, GpVerdict& out);

template <> inline std::string_view record_name<DsInput>() { return "ds_input"; }
template <> inline std::string_view record_name<DsVerdict>() { return "ds_verdict"; }
template <> inline std::string_view record_name<GpInput>() { return "gp_input"; }
template <> inline std::string_view record_name<GpVerdict>() { return "gp_verdict"; }

// ---------------------------------------------------------------------------
// Backend interfaces. Implementations must tolerate concurrent calls.

class DsBackend {
 public:
  virtual ~DsBackend() = default;
  virtual DsVerdict ds_evaluate(const DsInput& input) const = 0;
};

class GpBackend {
 public:
  virtual ~GpBackend() = default;
  virtual GpVerdict gp_evaluate(const GpInput& input) const = 0;
};

// ---------------------------------------------------------------------------
// Noise

/// "axis/action_type", e.g. "spatial/click"; passing actions use axis "none".
std::string pattern_key(FailureAxis axis, ActionType type);

/// Per-pattern flip probabilities for the oracle DS backend.
struct NoiseSchedule {
  double base_rate = 0.0;
  std::map<std::string, double> rates;

  double rate(const std::string& pattern) const;
  /// rate <- rate * (1 - factor)
  void reduce(const std::string& pattern, double factor);
  friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;
};

json encode(const NoiseSchedule& n);
NoiseSchedule noise_from_json(const json& j);

// ---------------------------------------------------------------------------
// Oracles

struct OracleDsConfig {
  bool use_eok = true;
  NoiseSchedule noise;
  std::uint64_t seed = 0;
  IntentionConfig intention;
};

/// Labels with the rule verifier against the world's stored ground truth.
/// Throws DataError when a context has no ground truth.
class OracleDsBackend : public DsBackend {
 public:
  OracleDsBackend(const World& world, OracleDsConfig config = {});
  DsVerdict ds_evaluate(const DsInput& input) const override;

  /// Noise-free rule verdict and the noise pattern of an input.
  VerificationResult truth(const DsInput& input) const;
  const OracleDsConfig& config() const noexcept { return config_; }

 private:
  const World& world_;
  OracleDsConfig config_;
};

struct OracleGpConfig {
  bool use_eok = true;
  /// Probability of flipping both the endorsement and the preference.
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  TextPolicy text;
};

class OracleGpBackend : public GpBackend {
 public:
  OracleGpBackend(const World& world, OracleGpConfig config = {});
  GpVerdict gp_evaluate(const GpInput& input) const override;

 private:
  const World& world_;
  OracleGpConfig config_;
};

/// Whether `a` passes every rule for the context's stored ground truth.
bool action_correct(const World& world, const StepContext& context, const Action& a,
                    bool use_eok, TextPolicy text = {});

}  // namespace rms
