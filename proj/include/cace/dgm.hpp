#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cace/config.hpp"
#include "cace/core.hpp"
#include "cace/rng.hpp"

namespace cace {

/// One realized cohort plus the knobs that produced it.
struct Trial {
  std::vector<Participant> participants;
  TrialConfig config;
  std::optional<TruthRecord> truth;  // filled after the compliance layers
};

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

/// Fixed class counts for quota sampling: floor(p_i * pool) per class, with
/// every leftover seat up to `target` going to the class of largest
/// probability (first on ties). For the default binary mix over n=350 this
/// yields 88 never-takers and 52 always-takers, 140 (40%) in total.
inline std::vector<std::size_t> exact_quotas(std::span<const double> props, std::size_t pool,
                                             std::size_t target) {
  if (props.empty()) throw std::invalid_argument("exact_quotas: no classes");
  std::vector<std::size_t> counts(props.size());
  std::size_t assigned = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(props[i] * static_cast<double>(pool)));
    assigned += counts[i];
    if (props[i] > props[largest]) largest = i;
  }
  if (assigned > target) throw std::invalid_argument("exact_quotas: quotas exceed target");
  counts[largest] += target - assigned;
  return counts;
}

/// Draws the base cohort: independent counterfactual outcomes, 1:1
/// Bernoulli assignment, everyone initialized as a perfect complier
/// (D(1)=1, D(0)=0).
inline Trial generate_base_trial(const TrialConfig& config, RngStream& rng) {
  validate(config);
  Trial trial;
  trial.config = config;
  trial.participants.resize(config.n);
  for (Participant& p : trial.participants) {
    p.y0 = rng.normal(config.mu0, config.sd0);
    p.y1 = rng.normal(config.mu1(), config.sd1);
    p.z = rng.bernoulli(0.5);
    p.dose_under_treatment = Dose::full();
    p.dose_under_control = Dose::none();
  }
  return trial;
}

namespace detail {

inline void apply_binary_random_layer(Trial& trial, RngStream& rng) {
  const auto& cfg = trial.config;
  const auto& bp = cfg.binary_random_props;
  const double n = static_cast<double>(cfg.n);
  const std::size_t target = round_half_up(bp.p_noncomplier() * n);
  const double props[] = {bp.p_nt, bp.p_at};
  const auto quotas = exact_quotas(props, cfg.n, target);

  std::vector<std::size_t> order(cfg.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  std::size_t next = 0;
  for (std::size_t k = 0; k < quotas[0]; ++k) {
    Participant& p = trial.participants[order[next++]];
    p.dose_under_treatment = Dose::none();
    p.dose_under_control = Dose::none();
  }
  for (std::size_t k = 0; k < quotas[1]; ++k) {
    Participant& p = trial.participants[order[next++]];
    p.dose_under_treatment = Dose::full();
    p.dose_under_control = Dose::full();
  }
}

/// Assigns observed doses within one arm by exact quotas over the arm's
/// realized size. Only the assigned arm's potential dose is rewritten; the
/// counterfactual side keeps its base value, which preserves monotonicity.
inline void assign_arm_doses(Trial& trial, std::vector<std::size_t>& members,
                             const DoseDistribution& dist, RngStream& rng) {
  if (members.empty()) return;
  const auto quotas = exact_quotas(dist.p, members.size(), members.size());
  rng.shuffle(members);
  std::size_t next = 0;
  for (int q = 0; q < 5; ++q) {
    const Dose dose = Dose::from_quarters(q);
    for (std::size_t k = 0; k < quotas[static_cast<std::size_t>(q)]; ++k) {
      Participant& p = trial.participants[members[next++]];
      (p.z ? p.dose_under_treatment : p.dose_under_control) = dose;
    }
  }
}

inline void apply_partial_random_layer(Trial& trial, RngStream& rng) {
  const auto& cfg = trial.config;
  std::vector<std::size_t> control, treatment;
  for (std::size_t i = 0; i < trial.participants.size(); ++i)
    (trial.participants[i].z ? treatment : control).push_back(i);

  if (cfg.noncomplier_types == NoncomplierTypes::nt_only) {
    // Non-compliance can only occur in the treatment arm.
    for (std::size_t i : control) trial.participants[i].dose_under_control = Dose::none();
  } else {
    assign_arm_doses(trial, control, cfg.partial_dose_props.control, rng);
  }
  assign_arm_doses(trial, treatment, cfg.partial_dose_props.treatment, rng);
}

}  // namespace detail

/// Random non-compliance layer on top of the base trial. Binary mode turns
/// exact quota-sized random subsets into never-takers / always-takers;
/// partial mode deals out observed doses per arm.
inline void apply_random_noncompliance(Trial& trial, RngStream& rng) {
  if (trial.config.compliance_mode == ComplianceMode::binary)
    detail::apply_binary_random_layer(trial, rng);
  else
    detail::apply_partial_random_layer(trial, rng);
}

/// Fills the derived fields D and Y from the potential doses and outcomes.
inline void derive_observed_fields(Trial& trial) {
  for (Participant& p : trial.participants) {
    p.dose_observed = observed_dose(p.z, p.dose_under_treatment, p.dose_under_control);
    p.y_observed = observed_outcome(p.dose_observed, p.y1, p.y0);
  }
}

}  // namespace cace
