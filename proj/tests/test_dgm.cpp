#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "cace/dgm.hpp"
#include "test_util.hpp"

using namespace cace;

namespace {

struct StratumCounts {
  std::size_t compliers = 0, never_takers = 0, always_takers = 0, defiers = 0;
};

StratumCounts count_strata(const Trial& trial) {
  StratumCounts c;
  for (const Participant& p : trial.participants) {
    switch (classify_stratum(p.dose_under_treatment, p.dose_under_control)) {
      case Stratum::complier: ++c.compliers; break;
      case Stratum::never_taker: ++c.never_takers; break;
      case Stratum::always_taker: ++c.always_takers; break;
      case Stratum::defier: ++c.defiers; break;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("quota allocation reproduces the documented class counts", "[dgm]") {
  const double nt_at[] = {0.25, 0.15};
  CHECK(exact_quotas(nt_at, 350, 140) == std::vector<std::size_t>{88, 52});

  const double nt_only[] = {0.40, 0.0};
  CHECK(exact_quotas(nt_only, 350, 140) == std::vector<std::size_t>{140, 0});

  const double sensitivity[] = {0.40, 0.20};
  CHECK(exact_quotas(sensitivity, 350, 210) == std::vector<std::size_t>{140, 70});

  const double doses[] = {0.5, 0.2, 0.1, 0.1, 0.1};
  const auto q = exact_quotas(doses, 175, 175);
  std::size_t total = 0;
  for (std::size_t k : q) total += k;
  CHECK(total == 175);
  CHECK(q[1] == 35);
}

TEST_CASE("base trial draws the configured population", "[dgm]") {
  TrialConfig config;
  RngStream rng(derive_rep_seed(config.master_seed, 0));
  const Trial trial = generate_base_trial(config, rng);
  REQUIRE(trial.participants.size() == 350);
  double y0_sum = 0.0;
  for (const Participant& p : trial.participants) {
    CHECK(p.dose_under_treatment == Dose::full());
    CHECK(p.dose_under_control == Dose::none());
    y0_sum += p.y0;
  }
  // 4 sigma band around the population mean
  CHECK(y0_sum / 350.0 == Catch::Approx(74.0).margin(4.0 / std::sqrt(350.0)));

  SECTION("null effect leaves no systematic outcome difference") {
    TrialConfig null_config;
    null_config.effect = 0.0;
    RngStream rng2(derive_rep_seed(3, 0));
    const Trial null_trial = generate_base_trial(null_config, rng2);
    double diff_sum = 0.0;
    for (const Participant& p : null_trial.participants) diff_sum += p.y1 - p.y0;
    CHECK(diff_sum / 350.0 == Catch::Approx(0.0).margin(4.0 * std::sqrt(2.0 / 350.0)));
  }

  SECTION("a degenerate trial size is rejected with the field name") {
    TrialConfig bad;
    bad.n = 0;
    RngStream rng3(1);
    try {
      generate_base_trial(bad, rng3);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "n");
    }
  }
}

TEST_CASE("binary random layer assigns exact quota subsets", "[dgm]") {
  TrialConfig config;  // nt_at defaults: 25% / 15% of 350
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    const Trial trial = testutil::simulate_trial(config, rep);
    const auto counts = count_strata(trial);
    CHECK(counts.never_takers == 88);
    CHECK(counts.always_takers == 52);
    CHECK(counts.compliers == 210);
    CHECK(counts.defiers == 0);
  }

  SECTION("never-takers only") {
    TrialConfig nt;
    nt.noncomplier_types = NoncomplierTypes::nt_only;
    nt.binary_random_props = default_binary_props(nt.noncomplier_types);
    const Trial trial = testutil::simulate_trial(nt, 0);
    const auto counts = count_strata(trial);
    CHECK(counts.never_takers == 140);
    CHECK(counts.always_takers == 0);
  }
}

TEST_CASE("partial random layer deals the arm dose distributions exactly", "[dgm]") {
  TrialConfig config;
  config.compliance_mode = ComplianceMode::partial;
  const Trial trial = testutil::simulate_trial(config, 1);

  std::array<std::size_t, 5> control_counts{}, treatment_counts{};
  std::size_t n_control = 0, n_treatment = 0;
  for (const Participant& p : trial.participants) {
    auto& counts = p.z ? treatment_counts : control_counts;
    ++counts[static_cast<std::size_t>(p.dose_observed.quarters())];
    (p.z ? n_treatment : n_control) += 1;
  }
  const auto expect_control = exact_quotas(config.partial_dose_props.control.p, n_control, n_control);
  const auto expect_treatment =
      exact_quotas(config.partial_dose_props.treatment.p, n_treatment, n_treatment);
  for (std::size_t q = 0; q < 5; ++q) {
    CHECK(control_counts[q] == expect_control[q]);
    CHECK(treatment_counts[q] == expect_treatment[q]);
  }

  SECTION("never-takers only forces the whole control arm to dose zero") {
    TrialConfig nt = config;
    nt.noncomplier_types = NoncomplierTypes::nt_only;
    const Trial t = testutil::simulate_trial(nt, 2);
    for (const Participant& p : t.participants)
      if (!p.z) CHECK(p.dose_observed == Dose::none());
  }
}

TEST_CASE("assignment and selection are independent of outcomes", "[dgm]") {
  TrialConfig config;
  std::vector<double> arm_diffs;
  double nt_y0_sum = 0.0;
  std::size_t nt_count = 0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    const Trial trial = testutil::simulate_trial(config, rep);
    double sum1 = 0.0, sum0 = 0.0;
    std::size_t n1 = 0, n0 = 0;
    for (const Participant& p : trial.participants) {
      if (p.z) {
        sum1 += p.y0;
        ++n1;
      } else {
        sum0 += p.y0;
        ++n0;
      }
      if (classify_stratum(p.dose_under_treatment, p.dose_under_control) == Stratum::never_taker) {
        nt_y0_sum += p.y0;
        ++nt_count;
      }
    }
    arm_diffs.push_back(sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0));
  }

  double mean_diff = 0.0;
  for (double d : arm_diffs) mean_diff += d;
  mean_diff /= static_cast<double>(arm_diffs.size());
  double var = 0.0;
  for (double d : arm_diffs) var += (d - mean_diff) * (d - mean_diff);
  var /= static_cast<double>(arm_diffs.size() - 1);
  const double t_stat = mean_diff / std::sqrt(var / static_cast<double>(arm_diffs.size()));
  CHECK(std::abs(t_stat) < 4.0);

  CHECK(nt_y0_sum / static_cast<double>(nt_count) ==
        Catch::Approx(74.0).margin(4.0 / std::sqrt(static_cast<double>(nt_count))));
}

TEST_CASE("regeneration with the same seed is an identity", "[dgm]") {
  TrialConfig config;
  config.compliance_mode = ComplianceMode::partial;
  config.scenario = Scenario::G;
  config.noncomplier_types = NoncomplierTypes::nt_at;
  const Trial a = testutil::simulate_trial(config, 17);
  const Trial b = testutil::simulate_trial(config, 17);
  CHECK(testutil::same_trial(a, b));
}

TEST_CASE("invalid dose distributions are rejected", "[dgm]") {
  TrialConfig config;
  config.compliance_mode = ComplianceMode::partial;
  config.partial_dose_props.control.p = {0.5, 0.2, 0.1, 0.1, 0.2};  // sums to 1.1
  try {
    validate(config);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "props");
  }
}
