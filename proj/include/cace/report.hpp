#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cace/config.hpp"
#include "cace/montecarlo.hpp"
#include "cace/types.hpp"

namespace cace {

/// One emitted table line: a (config, method) pair of Monte Carlo results.
/// Real-valued fields are rounded to 4 decimals before emission, so a row
/// survives a CSV round trip bit-exactly.
struct ResultRow {
  Scenario scenario = Scenario::random;
  ComplianceMode compliance = ComplianceMode::binary;
  NoncomplierTypes noncompliers = NoncomplierTypes::nt_at;
  double delta = 0.5;
  ThresholdCase threshold = ThresholdCase::I;
  double effect = -5.0;
  Method method = Method::itt;
  double truth = 0.0;
  double estimate = 0.0;
  double bias = 0.0;
  double bias_se = 0.0;
  double mse = 0.0;
  double coverage_pct = 0.0;
  std::size_t n_reps = 0;
  std::size_t n_divergent = 0;
  bool excluded_divergent = false;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view csv_header =
    "scenario,compliance,noncompliers,delta,threshold,effect,method,truth,estimate,bias,"
    "bias_se,mse,coverage_pct,n_reps,n_divergent,excluded_divergent";

inline double round4(double x) {
  if (!std::isfinite(x)) return x;
  return std::round(x * 1e4) / 1e4;
}

inline ResultRow make_result_row(const TrialConfig& config, const StudySummary& summary) {
  ResultRow row;
  row.scenario = config.scenario;
  row.compliance = config.compliance_mode;
  row.noncompliers = config.noncomplier_types;
  row.delta = round4(config.delta);
  row.threshold = config.threshold;
  row.effect = round4(config.effect);
  row.method = summary.method;
  row.truth = round4(summary.truth_mean);
  row.estimate = round4(summary.estimate_mean);
  row.bias = round4(summary.bias);
  row.bias_se = round4(summary.bias_mc_se);
  row.mse = round4(summary.mse);
  row.coverage_pct = round4(summary.coverage_pct);
  row.n_reps = summary.n_reps;
  row.n_divergent = summary.n_divergent;
  row.excluded_divergent = summary.excluded_divergent;
  return row;
}

/// Runs one study and produces its ITT, PP and IV rows.
inline std::vector<ResultRow> run_config_rows(const TrialConfig& config, bool exclude_divergent,
                                              unsigned n_threads = 0) {
  const auto records = run_study(config, n_threads);
  std::vector<ResultRow> rows;
  rows.reserve(3);
  for (Method m : {Method::itt, Method::pp, Method::iv})
    rows.push_back(make_result_row(config, summarize(records, m, exclude_divergent)));
  return rows;
}

namespace detail {

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

}  // namespace detail

inline std::string to_csv_line(const ResultRow& r) {
  std::string line;
  line += to_string(r.scenario);
  line += ',';
  line += to_string(r.compliance);
  line += ',';
  line += to_string(r.noncompliers);
  line += ',';
  line += detail::format_real(r.delta);
  line += ',';
  line += to_string(r.threshold);
  line += ',';
  line += detail::format_real(r.effect);
  line += ',';
  line += to_string(r.method);
  line += ',';
  line += detail::format_real(r.truth);
  line += ',';
  line += detail::format_real(r.estimate);
  line += ',';
  line += detail::format_real(r.bias);
  line += ',';
  line += detail::format_real(r.bias_se);
  line += ',';
  line += detail::format_real(r.mse);
  line += ',';
  line += detail::format_real(r.coverage_pct);
  line += ',';
  line += std::to_string(r.n_reps);
  line += ',';
  line += std::to_string(r.n_divergent);
  line += ',';
  line += r.excluded_divergent ? "true" : "false";
  return line;
}

inline ResultRow parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (fields.size() != 16) throw std::invalid_argument("parse_csv_row: expected 16 fields");

  ResultRow r;
  r.scenario = parse_scenario(fields[0]);
  r.compliance = parse_compliance_mode(fields[1]);
  r.noncompliers = parse_noncomplier_types(fields[2]);
  r.delta = std::stod(fields[3]);
  r.threshold = parse_threshold_case(fields[4]);
  r.effect = std::stod(fields[5]);
  r.method = parse_method(fields[6]);
  r.truth = std::stod(fields[7]);
  r.estimate = std::stod(fields[8]);
  r.bias = std::stod(fields[9]);
  r.bias_se = std::stod(fields[10]);
  r.mse = std::stod(fields[11]);
  r.coverage_pct = std::stod(fields[12]);
  r.n_reps = std::stoul(fields[13]);
  r.n_divergent = std::stoul(fields[14]);
  if (fields[15] == "true")
    r.excluded_divergent = true;
  else if (fields[15] == "false")
    r.excluded_divergent = false;
  else
    throw std::invalid_argument("parse_csv_row: bad flag field");
  return r;
}

inline void emit_csv(std::span<const ResultRow> rows, std::ostream& out) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  out << csv_header << '\n';
  for (const ResultRow& r : rows) out << to_csv_line(r) << '\n';
  if (!out) throw std::runtime_error("emit_csv: write failed");
}

/// Same content as the CSV, as pipe tables grouped by scenario.
inline void emit_markdown(std::span<const ResultRow> rows, std::ostream& out) {
  if (rows.empty()) throw std::invalid_argument("emit_markdown: no rows");
  Scenario current = rows.front().scenario;
  bool first = true;
  auto emit_group_header = [&](Scenario s) {
    if (!first) out << '\n';
    out << "### Scenario " << to_string(s) << "\n\n";
    out << "| compliance | noncompliers | delta | threshold | effect | method | truth | "
           "estimate | bias | bias_se | mse | coverage_pct | n_reps | n_divergent | "
           "excluded_divergent |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    first = false;
  };
  emit_group_header(current);
  for (const ResultRow& r : rows) {
    if (r.scenario != current) {
      current = r.scenario;
      emit_group_header(current);
    }
    out << "| " << to_string(r.compliance) << " | " << to_string(r.noncompliers) << " | "
        << detail::format_real(r.delta) << " | " << to_string(r.threshold) << " | "
        << detail::format_real(r.effect) << " | " << to_string(r.method) << " | "
        << detail::format_real(r.truth) << " | " << detail::format_real(r.estimate) << " | "
        << detail::format_real(r.bias) << " | " << detail::format_real(r.bias_se) << " | "
        << detail::format_real(r.mse) << " | " << detail::format_real(r.coverage_pct) << " | "
        << r.n_reps << " | " << r.n_divergent << " | "
        << (r.excluded_divergent ? "true" : "false") << " |\n";
  }
  if (!out) throw std::runtime_error("emit_markdown: write failed");
}

// ---------------------------------------------------------------------------
// Study grid
//
// The built-in grid enumerates four base families of trial configurations:
//   main         all 24 valid (mode, types, scenario) combinations at the
//                defaults (effect -5, delta 0.5, default proportions)
//   effect-zero  the same 24 with effect 0
//   mild-delta   the 20 non-random combinations with delta 1
//   proportions  the 24 with the larger non-compliance proportions
// for 92 base configurations, each crossed with the four compliance
// thresholds I-IV: 368 cells. Threshold cases beyond I are degenerate for
// binary cells but count as distinct analysis scenarios. The threshold
// sensitivity and the secondary thresholds-on-proportions analysis are the
// II-IV slices of the main and proportions families; divergent-run
// exclusion is an aggregation toggle, not a separate cell.
// ---------------------------------------------------------------------------

struct GridSpec {
  std::string label;
  std::vector<TrialConfig> cells;
};

namespace detail {

enum class GridFamily { main, effect_zero, mild_delta, proportions };

inline std::vector<TrialConfig> family_cells(GridFamily family, std::size_t reps,
                                             std::uint64_t master_seed) {
  std::vector<TrialConfig> cells;
  for (ComplianceMode mode : {ComplianceMode::binary, ComplianceMode::partial}) {
    for (NoncomplierTypes types : {NoncomplierTypes::nt_only, NoncomplierTypes::nt_at}) {
      for (Scenario s : {Scenario::random, Scenario::A, Scenario::B, Scenario::C, Scenario::D,
                         Scenario::E, Scenario::F, Scenario::G, Scenario::H}) {
        if (!valid_combination(mode, types, s)) continue;
        if (family == GridFamily::mild_delta && s == Scenario::random) continue;
        TrialConfig c;
        c.compliance_mode = mode;
        c.noncomplier_types = types;
        c.scenario = s;
        c.reps = reps;
        c.master_seed = master_seed;
        c.binary_random_props = default_binary_props(types);
        switch (family) {
          case GridFamily::main: break;
          case GridFamily::effect_zero: c.effect = 0.0; break;
          case GridFamily::mild_delta: c.delta = 1.0; break;
          case GridFamily::proportions:
            c.binary_random_props = sensitivity_binary_props(types);
            c.partial_dose_props = sensitivity_partial_props();
            break;
        }
        cells.push_back(c);
      }
    }
  }
  return cells;
}

inline std::vector<TrialConfig> cross_thresholds(std::vector<TrialConfig> base,
                                                 std::initializer_list<ThresholdCase> cases,
                                                 bool partial_only = false) {
  std::vector<TrialConfig> out;
  for (const TrialConfig& c : base) {
    if (partial_only && c.compliance_mode != ComplianceMode::partial) continue;
    for (ThresholdCase t : cases) {
      TrialConfig cell = c;
      cell.threshold = t;
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace detail

inline GridSpec build_grid(std::string_view label, std::size_t reps = 500,
                           std::uint64_t master_seed = 20230401) {
  using detail::GridFamily;
  using enum ThresholdCase;
  GridSpec grid;
  grid.label = label;

  if (label == "main") {
    grid.cells = detail::family_cells(GridFamily::main, reps, master_seed);
  } else if (label == "effect-zero") {
    grid.cells = detail::family_cells(GridFamily::effect_zero, reps, master_seed);
  } else if (label == "mild-delta") {
    grid.cells = detail::family_cells(GridFamily::mild_delta, reps, master_seed);
  } else if (label == "proportions") {
    grid.cells = detail::family_cells(GridFamily::proportions, reps, master_seed);
  } else if (label == "thresholds") {
    grid.cells = detail::cross_thresholds(detail::family_cells(GridFamily::main, reps, master_seed),
                                          {II, III, IV}, /*partial_only=*/true);
  } else if (label == "thresholds-proportions") {
    grid.cells = detail::cross_thresholds(
        detail::family_cells(GridFamily::proportions, reps, master_seed), {II, III, IV},
        /*partial_only=*/true);
  } else if (label == "full") {
    for (GridFamily family : {GridFamily::main, GridFamily::effect_zero, GridFamily::mild_delta,
                              GridFamily::proportions}) {
      auto crossed = detail::cross_thresholds(detail::family_cells(family, reps, master_seed),
                                              {I, II, III, IV});
      grid.cells.insert(grid.cells.end(), crossed.begin(), crossed.end());
    }
  } else {
    throw ConfigError("label", "unknown grid label: " + std::string(label));
  }
  return grid;
}

inline std::vector<ResultRow> run_grid(const GridSpec& grid, bool exclude_divergent,
                                       unsigned n_threads = 0) {
  std::vector<ResultRow> rows;
  rows.reserve(grid.cells.size() * 3);
  for (const TrialConfig& cell : grid.cells) {
    const auto cell_rows = run_config_rows(cell, exclude_divergent, n_threads);
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Method selection guide
// ---------------------------------------------------------------------------

enum class Recommendation { iv, pp, either, iv_with_caveat };

inline std::string_view to_string(Recommendation r) {
  switch (r) {
    case Recommendation::iv: return "IV";
    case Recommendation::pp: return "PP";
    case Recommendation::either: return "Either";
    case Recommendation::iv_with_caveat: return "IV-with-caveat";
  }
  return "?";
}

/// Which estimator to prefer for the complier effect in each scenario.
/// Binary compliance always favors IV; with partial compliance the answer
/// depends on the non-complier mix and on which conditions drive receipt.
/// G and H carry a caveat: screen IV replications for divergent fits.
inline Recommendation recommend_method(ComplianceMode mode, NoncomplierTypes types, Scenario s) {
  if (!valid_combination(mode, types, s))
    throw std::invalid_argument("recommend_method: invalid combination");
  if (mode == ComplianceMode::binary) return Recommendation::iv;
  if (types == NoncomplierTypes::nt_only) return Recommendation::pp;
  switch (s) {
    case Scenario::random: return Recommendation::either;
    case Scenario::A:
    case Scenario::B: return Recommendation::pp;
    case Scenario::C:
    case Scenario::D: return Recommendation::either;
    case Scenario::E:
    case Scenario::F: return Recommendation::iv;
    case Scenario::G:
    case Scenario::H: return Recommendation::iv_with_caveat;
  }
  throw std::invalid_argument("recommend_method: unknown scenario");
}

}  // namespace cace
