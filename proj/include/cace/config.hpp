#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "cace/types.hpp"

namespace cace {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::string message)
      : std::runtime_error(field + ": " + message),
        field_(std::move(field)),
        message_(std::move(message)) {}
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

/// Shares of the study population made never-takers / always-takers by the
/// random non-compliance layer (binary mode).
struct BinaryRandomProps {
  double p_nt = 0.25;
  double p_at = 0.15;
  double p_noncomplier() const { return p_nt + p_at; }
};

/// Probabilities over observed doses {0, 1/4, 1/2, 3/4, 1}, in that order.
struct DoseDistribution {
  std::array<double, 5> p{};
  double sum() const { return p[0] + p[1] + p[2] + p[3] + p[4]; }
};

struct PartialDoseProps {
  DoseDistribution control;
  DoseDistribution treatment;
};

/// IV replications are flagged divergent when the first stage nearly
/// vanishes or the estimate is extreme relative to the replication's truth.
struct DivergenceCriterion {
  double min_first_stage = 0.01;
  double bias_multiple = 5.0;
};

inline BinaryRandomProps default_binary_props(NoncomplierTypes t) {
  return t == NoncomplierTypes::nt_only ? BinaryRandomProps{0.40, 0.0}
                                        : BinaryRandomProps{0.25, 0.15};
}

inline BinaryRandomProps sensitivity_binary_props(NoncomplierTypes t) {
  return t == NoncomplierTypes::nt_only ? BinaryRandomProps{0.60, 0.0}
                                        : BinaryRandomProps{0.40, 0.20};
}

inline PartialDoseProps default_partial_props() {
  return {{{0.5, 0.2, 0.1, 0.1, 0.1}}, {{0.1, 0.1, 0.1, 0.2, 0.5}}};
}

inline PartialDoseProps sensitivity_partial_props() {
  return {{{0.6, 0.1, 0.1, 0.1, 0.1}}, {{0.3, 0.1, 0.1, 0.1, 0.4}}};
}

/// Everything one replication needs: data-generating parameters, the
/// non-compliance layers, the analysis threshold and the study size/seed.
struct TrialConfig {
  std::size_t n = 350;
  double mu0 = 74.0;
  double sd0 = 1.0;
  double effect = -5.0;  // tau = mu1 - mu0
  double sd1 = 1.0;
  ComplianceMode compliance_mode = ComplianceMode::binary;
  NoncomplierTypes noncomplier_types = NoncomplierTypes::nt_at;
  Scenario scenario = Scenario::random;
  double delta = 0.5;
  ThresholdCase threshold = ThresholdCase::I;
  BinaryRandomProps binary_random_props = default_binary_props(NoncomplierTypes::nt_at);
  PartialDoseProps partial_dose_props = default_partial_props();
  DivergenceCriterion divergence;
  std::size_t reps = 500;
  std::uint64_t master_seed = 20230401;

  double mu1() const { return mu0 + effect; }
};

inline bool scenario_requires_nt_at(Scenario s) {
  return s == Scenario::C || s == Scenario::D || s == Scenario::E || s == Scenario::F;
}

inline bool scenario_requires_partial(Scenario s) {
  return s == Scenario::G || s == Scenario::H;
}

inline bool valid_combination(ComplianceMode mode, NoncomplierTypes types, Scenario s) {
  if (scenario_requires_nt_at(s) && types != NoncomplierTypes::nt_at) return false;
  if (scenario_requires_partial(s) && mode != ComplianceMode::partial) return false;
  return true;
}

inline void validate(const TrialConfig& c) {
  if (c.n == 0) throw ConfigError("n", "trial size must be positive");
  if (!(c.sd0 > 0.0)) throw ConfigError("sd0", "standard deviation must be positive");
  if (!(c.sd1 > 0.0)) throw ConfigError("sd1", "standard deviation must be positive");
  if (c.reps < 2) throw ConfigError("reps", "at least 2 replications are required");

  if (c.scenario != Scenario::random && !(c.delta > 0.35))
    throw ConfigError("delta", "condition bands collapse for delta <= 0.35");
  if (scenario_requires_nt_at(c.scenario) && c.noncomplier_types != NoncomplierTypes::nt_at)
    throw ConfigError("scenario", std::string(to_string(c.scenario)) +
                                      " needs both never-takers and always-takers (--noncompliers nt-at)");
  if (scenario_requires_partial(c.scenario) && c.compliance_mode != ComplianceMode::partial)
    throw ConfigError("scenario", std::string(to_string(c.scenario)) +
                                      " is defined for partial compliance only (--compliance partial)");

  if (c.compliance_mode == ComplianceMode::binary) {
    const auto& bp = c.binary_random_props;
    if (bp.p_nt < 0.0 || bp.p_at < 0.0)
      throw ConfigError("binary-props", "proportions must be non-negative");
    if (bp.p_noncomplier() > 1.0 + 1e-12)
      throw ConfigError("binary-props", "non-complier proportions exceed 1");
    if (c.noncomplier_types == NoncomplierTypes::nt_only && bp.p_at != 0.0)
      throw ConfigError("binary-props", "p_at must be 0 when only never-takers are allowed");
  } else {
    for (const auto* dist : {&c.partial_dose_props.control, &c.partial_dose_props.treatment}) {
      for (double p : dist->p)
        if (p < 0.0) throw ConfigError("props", "dose probabilities must be non-negative");
      if (std::abs(dist->sum() - 1.0) > 1e-12)
        throw ConfigError("props", "each dose distribution must sum to 1");
    }
  }

  if (!(c.divergence.min_first_stage >= 0.0))
    throw ConfigError("min-first-stage", "must be non-negative");
  if (!(c.divergence.bias_multiple > 0.0))
    throw ConfigError("bias-multiple", "must be positive");
}

}  // namespace cace
