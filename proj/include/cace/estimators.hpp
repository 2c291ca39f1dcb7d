#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cace/config.hpp"
#include "cace/core.hpp"
#include "cace/dgm.hpp"
#include "cace/stats.hpp"
#include "cace/types.hpp"

namespace cace {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstrumentIrrelevanceError : public EstimationError {
 public:
  InstrumentIrrelevanceError()
      : EstimationError("instrument irrelevant: zero first stage (no mean dose difference between arms)") {}
};

/// One estimator's output for one replication.
struct EstimateRecord {
  Method method = Method::itt;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::size_t n_used = 0;
  double first_stage = 0.0;  // IV only: mean dose difference between arms
  bool divergent = false;
};

struct MeanDiff {
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n1 = 0;
  std::size_t n0 = 0;
};

/// mean(group1) - mean(group0) with se = sqrt(s1^2/n1 + s0^2/n0), unbiased
/// sample variances. Shared kernel of the ITT and Per-Protocol contrasts.
inline MeanDiff difference_in_means(std::span<const double> group1, std::span<const double> group0) {
  if (group1.size() < 2 || group0.size() < 2)
    throw EstimationError("difference_in_means: each group needs at least 2 observations");
  MeanDiff d;
  d.n1 = group1.size();
  d.n0 = group0.size();
  d.estimate = mean(group1) - mean(group0);
  d.se = std::sqrt(sample_variance(group1) / static_cast<double>(d.n1) +
                   sample_variance(group0) / static_cast<double>(d.n0));
  return d;
}

struct SimpleRegressionFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_sum_squares = 0.0;
  double regressor_centered_sum_squares = 0.0;
  std::size_t n = 0;
};

inline SimpleRegressionFit simple_ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("simple_ols: size mismatch");
  if (x.size() < 3) throw EstimationError("simple_ols: needs at least 3 observations");
  const double xbar = mean(x);
  const double ybar = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0.0) throw EstimationError("simple_ols: constant regressor");
  SimpleRegressionFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.regressor_centered_sum_squares = sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.residual_sum_squares += r * r;
  }
  return fit;
}

namespace detail {

inline EstimateRecord record_from_diff(Method method, const MeanDiff& d) {
  EstimateRecord r;
  r.method = method;
  r.estimate = d.estimate;
  r.se = d.se;
  r.ci_lower = d.estimate - z_0975 * d.se;
  r.ci_upper = d.estimate + z_0975 * d.se;
  r.n_used = d.n1 + d.n0;
  return r;
}

}  // namespace detail

/// Intention-to-treat: observed outcomes contrasted by assignment.
inline EstimateRecord itt(const Trial& trial) {
  std::vector<double> y1, y0;
  for (const Participant& p : trial.participants) (p.z ? y1 : y0).push_back(p.y_observed);
  if (y1.size() < 2 || y0.size() < 2) throw EstimationError("itt: an arm has fewer than 2 participants");
  return detail::record_from_diff(Method::itt, difference_in_means(y1, y0));
}

/// Per-Protocol contrast over observed compliers: treatment arm at or above
/// the threshold dose versus control arm at dose exactly zero.
inline EstimateRecord per_protocol(const Trial& trial, ThresholdCase threshold) {
  const Dose cutoff = threshold_min_dose(threshold);
  std::vector<double> treated, control;
  for (const Participant& p : trial.participants) {
    if (p.z && p.dose_observed >= cutoff) treated.push_back(p.y_observed);
    if (!p.z && p.dose_observed == Dose::none()) control.push_back(p.y_observed);
  }
  if (treated.size() < 2 || control.size() < 2)
    throw EstimationError("per_protocol: an observed-complier subgroup has fewer than 2 participants");
  return detail::record_from_diff(Method::pp, difference_in_means(treated, control));
}

/// Two-stage least squares with assignment as the instrument. The estimate
/// is the arm-mean ratio, identical to the second-stage slope of the
/// regression of Y on the fitted dose. The standard error uses residuals
/// formed with the actual dose against the fitted-dose spread.
inline EstimateRecord iv_two_stage(const Trial& trial) {
  const std::size_t n = trial.participants.size();
  if (n < 3) throw EstimationError("iv_two_stage: needs at least 3 participants");

  double y_sum1 = 0.0, y_sum0 = 0.0, d_sum1 = 0.0, d_sum0 = 0.0;
  std::size_t n1 = 0, n0 = 0;
  for (const Participant& p : trial.participants) {
    if (p.z) {
      y_sum1 += p.y_observed;
      d_sum1 += p.dose_observed.fraction();
      ++n1;
    } else {
      y_sum0 += p.y_observed;
      d_sum0 += p.dose_observed.fraction();
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0) throw EstimationError("iv_two_stage: an arm is empty");

  const double first_stage = d_sum1 / static_cast<double>(n1) - d_sum0 / static_cast<double>(n0);
  if (first_stage == 0.0) throw InstrumentIrrelevanceError{};

  const double itt_effect =
      y_sum1 / static_cast<double>(n1) - y_sum0 / static_cast<double>(n0);
  const double estimate = itt_effect / first_stage;

  // Fitted doses vary only through Z, so their centered sum of squares is
  // first_stage^2 * n1*n0/n.
  const double dhat_css = first_stage * first_stage * static_cast<double>(n1) *
                          static_cast<double>(n0) / static_cast<double>(n);
  const double ybar = (y_sum1 + y_sum0) / static_cast<double>(n);
  const double dbar = (d_sum1 + d_sum0) / static_cast<double>(n);
  double rss = 0.0;
  for (const Participant& p : trial.participants) {
    const double u = (p.y_observed - ybar) - estimate * (p.dose_observed.fraction() - dbar);
    rss += u * u;
  }
  const double se = std::sqrt(rss / static_cast<double>(n - 2) / dhat_css);

  EstimateRecord r;
  r.method = Method::iv;
  r.estimate = estimate;
  r.se = se;
  r.ci_lower = estimate - z_0975 * se;
  r.ci_upper = estimate + z_0975 * se;
  r.n_used = n;
  r.first_stage = first_stage;
  return r;
}

/// Divergence rule for IV replications: near-zero first stage or an
/// estimate extreme relative to the replication's own truth.
inline bool detect_divergent(const EstimateRecord& record, const TruthRecord& truth,
                             const DivergenceCriterion& criterion) {
  if (std::abs(record.first_stage) < criterion.min_first_stage) return true;
  const double scale = std::max(std::abs(truth.cace), 1.0);
  return std::abs(record.estimate - truth.cace) > criterion.bias_multiple * scale;
}

}  // namespace cace
