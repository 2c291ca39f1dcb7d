#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cace/config.hpp"
#include "cace/core.hpp"
#include "cace/dgm.hpp"
#include "cace/estimators.hpp"
#include "cace/rng.hpp"
#include "cace/scenarios.hpp"
#include "cace/stats.hpp"

namespace cace {

/// Outcome of one generate -> comply -> estimate pass. Estimator failures
/// are recorded here instead of aborting the study.
struct ReplicationRecord {
  std::size_t rep_index = 0;
  std::optional<TruthRecord> truth;
  std::optional<EstimateRecord> itt;
  std::optional<EstimateRecord> pp;
  std::optional<EstimateRecord> iv;
  std::string failure;  // reason for any missing piece

  const std::optional<EstimateRecord>& record_for(Method m) const {
    switch (m) {
      case Method::itt: return itt;
      case Method::pp: return pp;
      case Method::iv: return iv;
    }
    throw std::invalid_argument("unknown method");
  }
};

enum class TruthReference { cace, ate };

/// Monte Carlo aggregates for one (config, method) pair.
struct StudySummary {
  Method method = Method::itt;
  double truth_mean = 0.0;
  double estimate_mean = 0.0;
  double bias = 0.0;        // truth - estimate, averaged per replication
  double bias_mc_se = 0.0;  // sd(estimates) / sqrt(n_reps)
  double mse = 0.0;
  double coverage_pct = 0.0;
  std::size_t n_reps = 0;  // replications aggregated
  std::size_t n_divergent = 0;
  bool excluded_divergent = false;
  bool usable = false;
};

/// Runs the full per-replication pipeline on a stream derived from
/// (master seed, index): base trial, random non-compliance, scenario
/// overrides, observed values, truth, estimates, divergence flag.
inline ReplicationRecord run_replication(const TrialConfig& config, std::size_t rep_index) {
  validate(config);
  ReplicationRecord rec;
  rec.rep_index = rep_index;

  RngStream rng(derive_rep_seed(config.master_seed, rep_index));
  Trial trial = generate_base_trial(config, rng);
  apply_random_noncompliance(trial, rng);
  if (config.scenario != Scenario::random) apply_scenario(trial, scenario_spec(config.scenario));
  derive_observed_fields(trial);

  try {
    rec.truth = true_estimands(trial.participants, config.threshold, config.compliance_mode);
    trial.truth = rec.truth;
  } catch (const UndefinedCaceError& e) {
    rec.failure = e.what();
    return rec;
  }

  const auto run = [&rec](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const EstimationError& e) {
      if (!rec.failure.empty()) rec.failure += "; ";
      rec.failure += std::string(what) + ": " + e.what();
    }
  };
  run("itt", [&] { rec.itt = cace::itt(trial); });
  run("pp", [&] { rec.pp = per_protocol(trial, config.threshold); });
  run("iv", [&] {
    try {
      rec.iv = iv_two_stage(trial);
      rec.iv->divergent = detect_divergent(*rec.iv, *rec.truth, config.divergence);
    } catch (const InstrumentIrrelevanceError& e) {
      // Surfaced as a divergent replication with no usable estimate.
      EstimateRecord r;
      r.method = Method::iv;
      r.estimate = std::numeric_limits<double>::quiet_NaN();
      r.se = std::numeric_limits<double>::quiet_NaN();
      r.ci_lower = r.ci_upper = std::numeric_limits<double>::quiet_NaN();
      r.first_stage = 0.0;
      r.divergent = true;
      rec.iv = r;
      if (!rec.failure.empty()) rec.failure += "; ";
      rec.failure += std::string("iv: ") + e.what();
    }
  });
  return rec;
}

/// Executes all replications of a study. Replications are independent
/// tasks on derived streams; records land in index order, so every
/// aggregate is identical whatever the thread count.
inline std::vector<ReplicationRecord> run_study(const TrialConfig& config, unsigned n_threads = 0) {
  validate(config);
  std::vector<ReplicationRecord> records(config.reps);

  unsigned threads = n_threads != 0 ? n_threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  if (threads > config.reps) threads = static_cast<unsigned>(config.reps);

  if (threads <= 1) {
    for (std::size_t i = 0; i < config.reps; ++i) records[i] = run_replication(config, i);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= records.size() || failed.load()) break;
        records[i] = run_replication(config, i);
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return records;
}

/// Folds replication records into the study metrics for one method.
/// Bias follows the reporting convention truth - estimate. Records without
/// a finite estimate (or flagged divergent, when excluding) are dropped;
/// divergent replications are counted either way.
inline StudySummary summarize(std::span<const ReplicationRecord> records, Method method,
                              bool exclude_divergent, TruthReference reference = TruthReference::cace) {
  if (records.size() < 2) throw std::invalid_argument("summarize: needs at least 2 records");

  StudySummary s;
  s.method = method;
  s.excluded_divergent = exclude_divergent;

  double truth_sum = 0.0, est_sum = 0.0, sq_err_sum = 0.0;
  std::size_t covered = 0;
  std::vector<double> estimates;
  estimates.reserve(records.size());

  for (const ReplicationRecord& rec : records) {
    const auto& r = rec.record_for(method);
    if (r && r->divergent) ++s.n_divergent;
    if (!rec.truth || !r || !std::isfinite(r->estimate)) continue;
    if (exclude_divergent && r->divergent) continue;
    const double truth =
        reference == TruthReference::cace ? rec.truth->cace : rec.truth->ate;
    truth_sum += truth;
    est_sum += r->estimate;
    sq_err_sum += (r->estimate - truth) * (r->estimate - truth);
    if (r->ci_lower <= truth && truth <= r->ci_upper) ++covered;
    estimates.push_back(r->estimate);
  }

  s.n_reps = estimates.size();
  if (s.n_reps < 2) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.truth_mean = s.estimate_mean = s.bias = s.bias_mc_se = s.mse = s.coverage_pct = nan;
    s.usable = false;
    return s;
  }

  const double b = static_cast<double>(s.n_reps);
  s.truth_mean = truth_sum / b;
  s.estimate_mean = est_sum / b;
  s.bias = (truth_sum - est_sum) / b;
  s.bias_mc_se = std::sqrt(sample_variance(estimates) / b);
  s.mse = sq_err_sum / b;
  s.coverage_pct = 100.0 * static_cast<double>(covered) / b;
  s.usable = true;
  return s;
}

/// Minimum number of simulations for a target accuracy of the effect
/// estimate: ceil((z_{1-alpha/2} * sigma / accuracy)^2).
inline std::size_t required_simulations(double sigma, double accuracy, double alpha) {
  if (!(sigma > 0.0)) throw std::invalid_argument("required_simulations: sigma must be positive");
  if (!(accuracy > 0.0)) throw std::invalid_argument("required_simulations: accuracy must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("required_simulations: alpha must lie in (0,1)");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double root = z * sigma / accuracy;
  const double b = std::ceil(root * root);
  return b < 1.0 ? 1 : static_cast<std::size_t>(b);
}

}  // namespace cace
