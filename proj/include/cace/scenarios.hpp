#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cace/config.hpp"
#include "cace/dgm.hpp"
#include "cace/types.hpp"

namespace cace {

enum class ConditionBand {
  good,
  bad,
  severe_bad,
  moderately_bad,
  moderate_mild_bad,
  mild_bad,
  extremely_good,
  moderately_good,
  moderate_mild_good,
  mild_good,
  unconstrained,
};

enum class BandScheme { coarse, fine_g, fine_h };

/// Places a control counterfactual outcome into its condition band. Bands
/// are half-open [lower, upper); the endpoint shared with mu0 in the fine
/// schemes moves half a unit away from mu0 when delta = 1 (mirrored on the
/// good side).
inline ConditionBand classify_condition(double y0, double mu0, double delta, BandScheme scheme) {
  if (!(delta > 0.35)) throw std::invalid_argument("classify_condition: bands collapse for delta <= 0.35");

  switch (scheme) {
    case BandScheme::coarse:
      if (y0 < mu0 - delta) return ConditionBand::good;
      if (y0 >= mu0 + delta) return ConditionBand::bad;
      return ConditionBand::unconstrained;

    case BandScheme::fine_g: {
      const double mild_lower = (delta == 1.0) ? mu0 + 0.5 : mu0;
      if (y0 < mu0 - delta) return ConditionBand::good;
      if (y0 < mild_lower) return ConditionBand::unconstrained;
      if (y0 < mu0 + delta - 0.35) return ConditionBand::mild_bad;
      if (y0 < mu0 + delta - 0.2) return ConditionBand::moderate_mild_bad;
      if (y0 < mu0 + delta) return ConditionBand::moderately_bad;
      return ConditionBand::severe_bad;
    }

    case BandScheme::fine_h: {
      const double mild_upper = (delta == 1.0) ? mu0 - 0.5 : mu0;
      if (y0 < mu0 - delta) return ConditionBand::extremely_good;
      if (y0 < mu0 - delta + 0.2) return ConditionBand::moderately_good;
      if (y0 < mu0 - delta + 0.35) return ConditionBand::moderate_mild_good;
      if (y0 < mild_upper) return ConditionBand::mild_good;
      if (y0 < mu0 + delta) return ConditionBand::unconstrained;
      return ConditionBand::bad;
    }
  }
  throw std::invalid_argument("classify_condition: unknown scheme");
}

struct OverrideAction {
  enum class Kind { force_never, force_always, force_dose };
  Kind kind;
  Dose dose;  // meaningful for force_dose only

  static OverrideAction never() { return {Kind::force_never, Dose::none()}; }
  static OverrideAction always() { return {Kind::force_always, Dose::full()}; }
  static OverrideAction at(int quarters) {
    return {Kind::force_dose, Dose::from_quarters(quarters)};
  }
  Dose forced_dose() const {
    switch (kind) {
      case Kind::force_never: return Dose::none();
      case Kind::force_always: return Dose::full();
      case Kind::force_dose: return dose;
    }
    return Dose::none();
  }
};

/// Condition-dependent overrides of one non-random scenario.
struct ScenarioSpec {
  Scenario id = Scenario::random;
  BandScheme scheme = BandScheme::coarse;
  std::vector<std::pair<ConditionBand, OverrideAction>> overrides;

  std::optional<OverrideAction> action_for(ConditionBand band) const {
    for (const auto& [b, action] : overrides)
      if (b == band) return action;
    return std::nullopt;
  }
};

inline ScenarioSpec scenario_spec(Scenario s) {
  using B = ConditionBand;
  ScenarioSpec spec;
  spec.id = s;
  switch (s) {
    case Scenario::A:
      spec.overrides = {{B::good, OverrideAction::never()}};
      return spec;
    case Scenario::B:
      spec.overrides = {{B::bad, OverrideAction::never()}};
      return spec;
    case Scenario::C:
      spec.overrides = {{B::good, OverrideAction::always()}};
      return spec;
    case Scenario::D:
      spec.overrides = {{B::bad, OverrideAction::always()}};
      return spec;
    case Scenario::E:
      spec.overrides = {{B::bad, OverrideAction::always()}, {B::good, OverrideAction::never()}};
      return spec;
    case Scenario::F:
      spec.overrides = {{B::bad, OverrideAction::never()}, {B::good, OverrideAction::always()}};
      return spec;
    case Scenario::G:
      spec.scheme = BandScheme::fine_g;
      spec.overrides = {{B::good, OverrideAction::never()},
                        {B::severe_bad, OverrideAction::always()},
                        {B::moderately_bad, OverrideAction::at(3)},
                        {B::moderate_mild_bad, OverrideAction::at(2)},
                        {B::mild_bad, OverrideAction::at(1)}};
      return spec;
    case Scenario::H:
      spec.scheme = BandScheme::fine_h;
      spec.overrides = {{B::bad, OverrideAction::never()},
                        {B::extremely_good, OverrideAction::always()},
                        {B::moderately_good, OverrideAction::at(3)},
                        {B::moderate_mild_good, OverrideAction::at(2)},
                        {B::mild_good, OverrideAction::at(1)}};
      return spec;
    case Scenario::random:
      break;
  }
  throw std::invalid_argument("scenario_spec: the random scenario has no overrides");
}

/// Applies the scenario's condition-dependent overrides on top of the
/// random layer (overrides take precedence). Binary mode rewrites both
/// potential doses jointly, so conceptual strata change and no defier can
/// appear. Partial mode rewrites the observed (assigned-arm) dose; with
/// never-takers only, the control arm stays at its forced zero dose, which
/// suppresses any override there.
inline void apply_scenario(Trial& trial, const ScenarioSpec& spec) {
  const TrialConfig& cfg = trial.config;
  if (scenario_requires_nt_at(spec.id) && cfg.noncomplier_types != NoncomplierTypes::nt_at)
    throw ConfigError("scenario", "needs both never-takers and always-takers");
  if (scenario_requires_partial(spec.id) && cfg.compliance_mode != ComplianceMode::partial)
    throw ConfigError("scenario", "is defined for partial compliance only");

  const bool partial = cfg.compliance_mode == ComplianceMode::partial;
  const bool nt_only = cfg.noncomplier_types == NoncomplierTypes::nt_only;

  for (Participant& p : trial.participants) {
    const auto band = classify_condition(p.y0, cfg.mu0, cfg.delta, spec.scheme);
    const auto action = spec.action_for(band);
    if (!action) continue;

    if (!partial) {
      const Dose dose = action->forced_dose();
      p.dose_under_treatment = dose;
      p.dose_under_control = dose;
    } else {
      if (nt_only && !p.z) continue;  // control receipt is impossible here
      (p.z ? p.dose_under_treatment : p.dose_under_control) = action->forced_dose();
    }
  }
}

}  // namespace cace
