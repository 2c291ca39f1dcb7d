#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "cace/cli.hpp"
#include "cace/report.hpp"

using namespace cace;

namespace {

ResultRow sample_row() {
  ResultRow r;
  r.scenario = Scenario::A;
  r.compliance = ComplianceMode::binary;
  r.noncompliers = NoncomplierTypes::nt_at;
  r.delta = 0.5;
  r.threshold = ThresholdCase::I;
  r.effect = -5.0;
  r.method = Method::pp;
  r.truth = round4(-5.5092);
  r.estimate = round4(-4.9518);
  r.bias = round4(-0.5574);
  r.bias_se = round4(0.0051);
  r.mse = round4(0.3331);
  r.coverage_pct = round4(97.0);
  r.n_reps = 500;
  r.n_divergent = 0;
  r.excluded_divergent = false;
  return r;
}

}  // namespace

TEST_CASE("csv emission has the pinned header and fixed-width reals", "[report]") {
  std::ostringstream out;
  const std::vector<ResultRow> rows{sample_row()};
  emit_csv(rows, out);

  std::istringstream in(out.str());
  std::string header, line, extra;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, line));
  CHECK_FALSE(std::getline(in, extra));  // exactly two lines
  CHECK(header ==
        "scenario,compliance,noncompliers,delta,threshold,effect,method,truth,estimate,bias,"
        "bias_se,mse,coverage_pct,n_reps,n_divergent,excluded_divergent");
  CHECK(line.find("97.0000") != std::string::npos);
  CHECK(line.find(",PP,") != std::string::npos);

  SECTION("no rows is an error") {
    std::ostringstream sink;
    CHECK_THROWS_AS(emit_csv(std::vector<ResultRow>{}, sink), std::invalid_argument);
  }
}

TEST_CASE("csv rows survive a round trip exactly", "[report]") {
  const ResultRow row = sample_row();
  const ResultRow reparsed = parse_csv_row(to_csv_line(row));
  CHECK(reparsed == row);
}

TEST_CASE("markdown output groups rows by scenario", "[report]") {
  std::vector<ResultRow> rows{sample_row(), sample_row(), sample_row()};
  rows[2].scenario = Scenario::B;
  std::ostringstream out;
  emit_markdown(rows, out);
  const std::string text = out.str();
  CHECK(text.find("### Scenario A") != std::string::npos);
  CHECK(text.find("### Scenario B") != std::string::npos);
  CHECK(text.find("| binary | nt-at |") != std::string::npos);
}

TEST_CASE("the built-in grid has the documented shape", "[report]") {
  CHECK(build_grid("main").cells.size() == 24);
  CHECK(build_grid("effect-zero").cells.size() == 24);
  CHECK(build_grid("mild-delta").cells.size() == 20);
  CHECK(build_grid("proportions").cells.size() == 24);
  CHECK(build_grid("thresholds").cells.size() == 42);
  CHECK(build_grid("thresholds-proportions").cells.size() == 42);

  const GridSpec full = build_grid("full");
  CHECK(full.cells.size() == 368);

  std::size_t binary_cells = 0, partial_cells = 0, effect_zero = 0, mild = 0;
  for (const TrialConfig& c : full.cells) {
    (c.compliance_mode == ComplianceMode::binary ? binary_cells : partial_cells) += 1;
    if (c.effect == 0.0) ++effect_zero;
    if (c.delta == 1.0) ++mild;
    CHECK_NOTHROW(validate(c));
  }
  CHECK(binary_cells == 152);   // (10+10+8+10) valid binary configs x 4 thresholds
  CHECK(partial_cells == 216);  // (14+14+12+14) valid partial configs x 4 thresholds
  CHECK(effect_zero == 96);
  CHECK(mild == 80);

  CHECK_THROWS_AS(build_grid("bogus"), ConfigError);

  SECTION("every effect-zero cell keeps the other defaults") {
    for (const TrialConfig& c : build_grid("effect-zero").cells) {
      CHECK(c.effect == 0.0);
      CHECK(c.delta == 0.5);
      CHECK(c.threshold == ThresholdCase::I);
    }
  }
  SECTION("mild-delta has no random cells") {
    for (const TrialConfig& c : build_grid("mild-delta").cells) CHECK(c.scenario != Scenario::random);
  }
  SECTION("threshold families are partial-mode slices beyond case I") {
    for (const std::string label : {"thresholds", "thresholds-proportions"})
      for (const TrialConfig& c : build_grid(label).cells) {
        CHECK(c.compliance_mode == ComplianceMode::partial);
        CHECK(c.threshold != ThresholdCase::I);
      }
  }
}

TEST_CASE("method recommendations reproduce the selection guide", "[report]") {
  using enum Scenario;
  // Binary compliance: IV everywhere.
  for (Scenario s : {random, A, B}) {
    CHECK(recommend_method(ComplianceMode::binary, NoncomplierTypes::nt_only, s) == Recommendation::iv);
  }
  for (Scenario s : {random, A, B, C, D, E, F}) {
    CHECK(recommend_method(ComplianceMode::binary, NoncomplierTypes::nt_at, s) == Recommendation::iv);
  }
  // Partial compliance, never-takers only: PP everywhere.
  for (Scenario s : {random, A, B, G, H}) {
    CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_only, s) == Recommendation::pp);
  }
  // Partial with both non-complier types.
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, A) == Recommendation::pp);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, B) == Recommendation::pp);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, C) == Recommendation::either);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, D) == Recommendation::either);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, E) == Recommendation::iv);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, F) == Recommendation::iv);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, G) ==
        Recommendation::iv_with_caveat);
  CHECK(recommend_method(ComplianceMode::partial, NoncomplierTypes::nt_at, H) ==
        Recommendation::iv_with_caveat);

  SECTION("total over the valid lattice, errors elsewhere") {
    for (ComplianceMode mode : {ComplianceMode::binary, ComplianceMode::partial})
      for (NoncomplierTypes types : {NoncomplierTypes::nt_only, NoncomplierTypes::nt_at})
        for (Scenario s : {random, A, B, C, D, E, F, G, H}) {
          if (valid_combination(mode, types, s))
            CHECK_NOTHROW(recommend_method(mode, types, s));
          else
            CHECK_THROWS_AS(recommend_method(mode, types, s), std::invalid_argument);
        }
  }
}

TEST_CASE("command line parsing accepts the documented forms", "[report]") {
  const auto req = parse_cli({"run", "--scenario", "A", "--compliance", "binary", "--noncompliers",
                              "nt-at", "--reps", "500", "--seed", "1"});
  CHECK(req.kind == CliRequest::Kind::run);
  CHECK(req.config.scenario == Scenario::A);
  CHECK(req.config.reps == 500);
  CHECK(req.config.master_seed == 1);
  CHECK(req.config.binary_random_props.p_nt == 0.25);

  SECTION("applicability violations name the offending flag") {
    CHECK_THROWS_WITH(parse_cli({"run", "--scenario", "C", "--noncompliers", "nt"}),
                      Catch::Matchers::ContainsSubstring("scenario"));
    CHECK_THROWS_WITH(parse_cli({"run", "--scenario", "G", "--compliance", "binary"}),
                      Catch::Matchers::ContainsSubstring("scenario"));
  }

  SECTION("unknown flags are rejected with their name") {
    CHECK_THROWS_WITH(parse_cli({"run", "--frobnicate"}),
                      Catch::Matchers::ContainsSubstring("--frobnicate"));
  }

  SECTION("custom proportions flow into the config") {
    const auto custom = parse_cli({"run", "--compliance", "partial", "--props",
                                   "0.6,0.1,0.1,0.1,0.1;0.3,0.1,0.1,0.1,0.4"});
    CHECK(custom.config.partial_dose_props.control.p[0] == 0.6);
    CHECK(custom.config.partial_dose_props.treatment.p[4] == 0.4);

    const auto binary = parse_cli({"run", "--noncompliers", "nt", "--binary-props", "0.6,0"});
    CHECK(binary.config.binary_random_props.p_nt == 0.6);
    CHECK(binary.config.binary_random_props.p_at == 0.0);
  }

  SECTION("grid labels are validated at parse time") {
    const auto grid = parse_cli({"grid", "--label", "main"});
    CHECK(grid.kind == CliRequest::Kind::grid);
    CHECK(grid.grid_label == "main");
    CHECK_THROWS_AS(parse_cli({"grid", "--label", "nope"}), ConfigError);
  }

  SECTION("recommend rejects invalid combinations") {
    const auto rec = parse_cli({"recommend", "--compliance", "partial", "--noncompliers", "nt-at",
                                "--scenario", "G"});
    CHECK(rec.kind == CliRequest::Kind::recommend);
    CHECK_THROWS_AS(
        parse_cli({"recommend", "--compliance", "binary", "--scenario", "G"}), CliError);
  }
}

TEST_CASE("cli execution emits tables end to end", "[report]") {
  std::ostringstream out, err;

  SECTION("run subcommand, csv to stdout") {
    auto req = parse_cli({"run", "--reps", "30", "--seed", "9"});
    CHECK(execute_cli(req, out, err) == 0);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == std::string(csv_header));
    std::size_t data_lines = 0;
    for (std::string l; std::getline(lines, l);) ++data_lines;
    CHECK(data_lines == 3);  // one per method
  }

  SECTION("recommend subcommand prints the token") {
    auto req = parse_cli({"recommend", "--compliance", "partial", "--noncompliers", "nt",
                          "--scenario", "G"});
    CHECK(execute_cli(req, out, err) == 0);
    CHECK(out.str() == "PP\n");
  }

  SECTION("unwritable sink fails with a diagnostic") {
    auto req = parse_cli({"run", "--reps", "30", "--out", "/nonexistent/dir/rows.csv"});
    CHECK(execute_cli(req, out, err) == 1);
    CHECK(err.str().find("--out") != std::string::npos);
  }
}

TEST_CASE("grid rows count configs times methods", "[report]") {
  GridSpec grid = build_grid("main", 20, 5);
  grid.cells.resize(4);  // keep the smoke test quick
  const auto rows = run_grid(grid, false);
  CHECK(rows.size() == 12);
}
