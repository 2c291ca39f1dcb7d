#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cace/config.hpp"
#include "cace/report.hpp"
#include "cace/types.hpp"

namespace cace {

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the user asked for --help; carries the text to print.
struct CliHelpRequested {
  std::string text;
};

/// A parsed command line: which subcommand to execute and with what.
struct CliRequest {
  enum class Kind { run, grid, recommend, tables };
  enum class Format { csv, md };

  Kind kind = Kind::run;
  TrialConfig config;        // run
  std::string grid_label;    // grid
  std::size_t reps = 500;
  std::uint64_t seed = 20230401;
  bool exclude_divergent = false;
  std::string out_path;      // empty means stdout
  Format format = Format::csv;

  // recommend
  ComplianceMode rec_compliance = ComplianceMode::binary;
  NoncomplierTypes rec_noncompliers = NoncomplierTypes::nt_at;
  Scenario rec_scenario = Scenario::random;
};

namespace detail {

inline std::vector<double> parse_real_list(const std::string& s, char sep) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (const std::exception&) {
      throw CliError("could not parse number '" + item + "'");
    }
  }
  return out;
}

inline PartialDoseProps parse_partial_props(const std::string& s) {
  const auto split = s.find(';');
  if (split == std::string::npos)
    throw CliError("--props: expected '<5 control probs>;<5 treatment probs>'");
  const auto control = parse_real_list(s.substr(0, split), ',');
  const auto treatment = parse_real_list(s.substr(split + 1), ',');
  if (control.size() != 5 || treatment.size() != 5)
    throw CliError("--props: each arm needs 5 comma-separated probabilities over doses 0,1/4,1/2,3/4,1");
  PartialDoseProps props;
  for (int i = 0; i < 5; ++i) {
    props.control.p[static_cast<std::size_t>(i)] = control[static_cast<std::size_t>(i)];
    props.treatment.p[static_cast<std::size_t>(i)] = treatment[static_cast<std::size_t>(i)];
  }
  return props;
}

inline BinaryRandomProps parse_binary_props(const std::string& s) {
  const auto values = parse_real_list(s, ',');
  if (values.size() != 2) throw CliError("--binary-props: expected '<p_nt>,<p_at>'");
  return BinaryRandomProps{values[0], values[1]};
}

}  // namespace detail

/// Parses a full argument list (without the program name). Throws CliError
/// with a one-line diagnostic naming the offending flag.
inline CliRequest parse_cli(const std::vector<std::string>& args) {
  CLI::App app{"Monte Carlo comparison of Per-Protocol and IV estimators of the complier average causal effect"};
  app.require_subcommand(1);

  CliRequest req;

  std::string compliance = "binary", noncompliers = "nt-at", scenario = "random", threshold = "I";
  std::string props, binary_props, format = "csv";
  std::size_t n = 350;
  double effect = -5.0, delta = 0.5;
  double min_first_stage = 0.01, bias_multiple = 5.0;
  bool binary_props_given = false;

  auto* run = app.add_subcommand("run", "simulate one trial configuration and report all estimators");
  run->add_option("--n", n, "participants per trial");
  run->add_option("--reps", req.reps, "Monte Carlo replications");
  run->add_option("--seed", req.seed, "master seed");
  run->add_option("--effect", effect, "treatment effect (mu1 - mu0, mmHg)");
  run->add_option("--compliance", compliance, "binary|partial")
      ->check(CLI::IsMember({"binary", "partial"}));
  run->add_option("--noncompliers", noncompliers, "nt|nt-at")
      ->check(CLI::IsMember({"nt", "nt-at"}));
  run->add_option("--scenario", scenario, "random|A..H")
      ->check(CLI::IsMember({"random", "A", "B", "C", "D", "E", "F", "G", "H"}));
  run->add_option("--delta", delta, "condition-band severity");
  run->add_option("--threshold", threshold, "compliance threshold case I|II|III|IV")
      ->check(CLI::IsMember({"I", "II", "III", "IV"}));
  run->add_option("--props", props,
                  "partial dose probabilities '<5 control>;<5 treatment>' over doses 0,1/4,1/2,3/4,1");
  auto* bp_opt = run->add_option("--binary-props", binary_props, "binary layer '<p_nt>,<p_at>'");
  run->add_option("--min-first-stage", min_first_stage, "divergence cutoff on |first stage|");
  run->add_option("--bias-multiple", bias_multiple, "divergence cutoff on |estimate - truth| / max(|truth|,1)");
  run->add_flag("--exclude-divergent", req.exclude_divergent,
                "drop divergent IV replications from the aggregates");
  run->add_option("--out", req.out_path, "output path (default stdout)");
  run->add_option("--format", format, "csv|md")->check(CLI::IsMember({"csv", "md"}));

  auto* grid = app.add_subcommand("grid", "run a built-in family of trial configurations");
  std::string label = "main";
  grid->add_option("--label", label,
                   "main|effect-zero|mild-delta|proportions|thresholds|thresholds-proportions|full");
  grid->add_option("--reps", req.reps, "Monte Carlo replications per cell");
  grid->add_option("--seed", req.seed, "master seed");
  grid->add_flag("--exclude-divergent", req.exclude_divergent,
                 "drop divergent IV replications from the aggregates");
  grid->add_option("--out", req.out_path, "output path (default stdout)");
  grid->add_option("--format", format, "csv|md")->check(CLI::IsMember({"csv", "md"}));

  auto* recommend = app.add_subcommand("recommend", "which estimator to prefer for a scenario");
  std::string rec_compliance = "binary", rec_noncompliers = "nt-at", rec_scenario = "random";
  recommend->add_option("--compliance", rec_compliance, "binary|partial")
      ->check(CLI::IsMember({"binary", "partial"}));
  recommend->add_option("--noncompliers", rec_noncompliers, "nt|nt-at")
      ->check(CLI::IsMember({"nt", "nt-at"}));
  recommend->add_option("--scenario", rec_scenario, "random|A..H")
      ->check(CLI::IsMember({"random", "A", "B", "C", "D", "E", "F", "G", "H"}));

  auto* tables = app.add_subcommand("tables", "emit the main-analysis tables (markdown by default)");
  tables->add_option("--reps", req.reps, "Monte Carlo replications per cell");
  tables->add_option("--seed", req.seed, "master seed");
  tables->add_flag("--exclude-divergent", req.exclude_divergent,
                   "drop divergent IV replications from the aggregates");
  tables->add_option("--out", req.out_path, "output path (default stdout)");
  std::string tables_format = "md";
  tables->add_option("--format", tables_format, "csv|md")->check(CLI::IsMember({"csv", "md"}));

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("cacesim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw CliHelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw CliHelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw CliError(e.what());
  }
  binary_props_given = bp_opt->count() > 0;

  if (run->parsed()) {
    req.kind = CliRequest::Kind::run;
    TrialConfig& c = req.config;
    c.n = n;
    c.reps = req.reps;
    c.master_seed = req.seed;
    c.effect = effect;
    c.compliance_mode = parse_compliance_mode(compliance);
    c.noncomplier_types = parse_noncomplier_types(noncompliers);
    c.scenario = parse_scenario(scenario);
    c.delta = delta;
    c.threshold = parse_threshold_case(threshold);
    c.binary_random_props = binary_props_given ? detail::parse_binary_props(binary_props)
                                               : default_binary_props(c.noncomplier_types);
    if (!props.empty()) c.partial_dose_props = detail::parse_partial_props(props);
    c.divergence = DivergenceCriterion{min_first_stage, bias_multiple};
    try {
      validate(c);
    } catch (const ConfigError& e) {
      throw CliError("--" + e.field() + ": " + e.message());
    }
  } else if (grid->parsed()) {
    req.kind = CliRequest::Kind::grid;
    req.grid_label = label;
    build_grid(label, 2, 0);  // reject unknown labels up front
  } else if (recommend->parsed()) {
    req.kind = CliRequest::Kind::recommend;
    req.rec_compliance = parse_compliance_mode(rec_compliance);
    req.rec_noncompliers = parse_noncomplier_types(rec_noncompliers);
    req.rec_scenario = parse_scenario(rec_scenario);
    if (!valid_combination(req.rec_compliance, req.rec_noncompliers, req.rec_scenario))
      throw CliError("--scenario: " + rec_scenario + " cannot occur with --compliance " +
                     rec_compliance + " --noncompliers " + rec_noncompliers);
  } else if (tables->parsed()) {
    req.kind = CliRequest::Kind::tables;
    req.grid_label = "main";
    format = tables_format;
  }

  req.format = format == "md" ? CliRequest::Format::md : CliRequest::Format::csv;
  return req;
}

/// Executes a parsed request. Returns a process exit code.
inline int execute_cli(const CliRequest& req, std::ostream& out, std::ostream& err) {
  try {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!req.out_path.empty()) {
      file.open(req.out_path);
      if (!file) {
        err << "error: --out: cannot open '" << req.out_path << "' for writing\n";
        return 1;
      }
      sink = &file;
    }

    const auto emit = [&](const std::vector<ResultRow>& rows) {
      if (req.format == CliRequest::Format::csv)
        emit_csv(rows, *sink);
      else
        emit_markdown(rows, *sink);
    };

    switch (req.kind) {
      case CliRequest::Kind::run:
        emit(run_config_rows(req.config, req.exclude_divergent));
        break;
      case CliRequest::Kind::grid:
      case CliRequest::Kind::tables: {
        const GridSpec grid = build_grid(req.grid_label, req.reps, req.seed);
        emit(run_grid(grid, req.exclude_divergent));
        break;
      }
      case CliRequest::Kind::recommend:
        out << to_string(recommend_method(req.rec_compliance, req.rec_noncompliers, req.rec_scenario))
            << '\n';
        break;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cace
