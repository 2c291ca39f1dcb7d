#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "cace/types.hpp"

namespace cace {

/// One trial participant. y0/y1 are the counterfactual outcomes under
/// control and treatment receipt; the dose fields hold the potential
/// receipt under each assignment and the derived observed values.
struct Participant {
  double y0 = 0.0;
  double y1 = 0.0;
  bool z = false;                // assignment, true = treatment arm
  Dose dose_under_treatment;     // D(1)
  Dose dose_under_control;       // D(0)
  Dose dose_observed;            // D, derived
  double y_observed = 0.0;       // Y, derived
};

enum class Stratum { complier, never_taker, always_taker, defier };

/// D = Z*D(1) + (1-Z)*D(0): assignment selects which potential receipt is
/// realized.
inline Dose observed_dose(bool z, Dose d1, Dose d0) { return z ? d1 : d0; }

/// Y = D*Y(1) + (1-D)*Y(0), applied with fractional doses in partial mode
/// (linear dose-response).
inline double observed_outcome(Dose dose, double y1, double y0) {
  const double f = dose.fraction();
  return f * y1 + (1.0 - f) * y0;
}

/// Conceptual compliance type from the pair of potential receipts.
/// Defined for binary doses only.
inline Stratum classify_stratum(Dose d1, Dose d0) {
  if (!d1.is_binary() || !d0.is_binary())
    throw std::logic_error("classify_stratum: conceptual strata require binary doses");
  const bool takes_if_treated = d1 == Dose::full();
  const bool takes_if_control = d0 == Dose::full();
  if (takes_if_treated && !takes_if_control) return Stratum::complier;
  if (!takes_if_treated && !takes_if_control) return Stratum::never_taker;
  if (takes_if_treated && takes_if_control) return Stratum::always_taker;
  return Stratum::defier;
}

/// Per-replication true estimands of one realized cohort.
struct TruthRecord {
  double cace = 0.0;             // mean effect over the trial's complier set
  double ate = 0.0;              // mean of y1 - y0 over everyone
  std::size_t n_true_compliers = 0;
};

class UndefinedCaceError : public std::runtime_error {
 public:
  UndefinedCaceError()
      : std::runtime_error("CACE undefined: the trial contains no compliers") {}
  std::size_t n_true_compliers = 0;
};

/// Whether a participant belongs to the trial's complier set for truth
/// purposes. Binary mode uses the conceptual stratum; partial mode uses the
/// arm-pooled observed-complier set: treatment arm at or above the
/// threshold dose, control arm at dose exactly zero.
inline bool is_true_complier(const Participant& p, ThresholdCase threshold, ComplianceMode mode) {
  if (mode == ComplianceMode::binary)
    return classify_stratum(p.dose_under_treatment, p.dose_under_control) == Stratum::complier;
  if (p.z) return p.dose_observed >= threshold_min_dose(threshold);
  return p.dose_observed == Dose::none();
}

inline TruthRecord true_estimands(std::span<const Participant> participants,
                                  ThresholdCase threshold, ComplianceMode mode) {
  if (participants.empty()) throw std::invalid_argument("true_estimands: empty trial");

  double effect_sum = 0.0;
  double complier_effect_sum = 0.0;
  std::size_t n_compliers = 0;
  for (const Participant& p : participants) {
    const double effect = p.y1 - p.y0;
    effect_sum += effect;
    if (is_true_complier(p, threshold, mode)) {
      complier_effect_sum += effect;
      ++n_compliers;
    }
  }

  if (n_compliers == 0) throw UndefinedCaceError{};

  TruthRecord truth;
  truth.ate = effect_sum / static_cast<double>(participants.size());
  truth.cace = complier_effect_sum / static_cast<double>(n_compliers);
  truth.n_true_compliers = n_compliers;
  return truth;
}

}  // namespace cace
