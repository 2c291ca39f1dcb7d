#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cace {

enum class ComplianceMode { binary, partial };

enum class NoncomplierTypes { nt_only, nt_at };

enum class Scenario { random, A, B, C, D, E, F, G, H };

// Dose cutoffs defining observed compliers: full, >=3/4, >=1/2, any part.
enum class ThresholdCase { I, II, III, IV };

enum class Method { itt, pp, iv };

/// Treatment dose as a count of quarters (0..4), i.e. 0, 2, 4, 6 or 8 hours
/// of an 8-hour regimen. Integer storage keeps threshold comparisons and
/// class membership exact.
class Dose {
 public:
  constexpr Dose() = default;

  static constexpr Dose from_quarters(int q) {
    if (q < 0 || q > 4) throw std::invalid_argument("dose quarters out of range");
    return Dose(q);
  }
  static constexpr Dose none() { return Dose(0); }
  static constexpr Dose full() { return Dose(4); }

  constexpr int quarters() const { return quarters_; }
  constexpr double fraction() const { return quarters_ / 4.0; }
  constexpr bool is_binary() const { return quarters_ == 0 || quarters_ == 4; }

  friend constexpr auto operator<=>(Dose, Dose) = default;

 private:
  constexpr explicit Dose(int q) : quarters_(q) {}
  int quarters_ = 0;
};

/// Minimum observed dose that counts as compliance in the treatment arm.
constexpr Dose threshold_min_dose(ThresholdCase c) {
  switch (c) {
    case ThresholdCase::I: return Dose::from_quarters(4);
    case ThresholdCase::II: return Dose::from_quarters(3);
    case ThresholdCase::III: return Dose::from_quarters(2);
    case ThresholdCase::IV: return Dose::from_quarters(1);
  }
  throw std::invalid_argument("unknown threshold case");
}

inline std::string_view to_string(ComplianceMode m) {
  return m == ComplianceMode::binary ? "binary" : "partial";
}

inline std::string_view to_string(NoncomplierTypes t) {
  return t == NoncomplierTypes::nt_only ? "nt" : "nt-at";
}

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::random: return "random";
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::D: return "D";
    case Scenario::E: return "E";
    case Scenario::F: return "F";
    case Scenario::G: return "G";
    case Scenario::H: return "H";
  }
  return "?";
}

inline std::string_view to_string(ThresholdCase c) {
  switch (c) {
    case ThresholdCase::I: return "I";
    case ThresholdCase::II: return "II";
    case ThresholdCase::III: return "III";
    case ThresholdCase::IV: return "IV";
  }
  return "?";
}

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::itt: return "ITT";
    case Method::pp: return "PP";
    case Method::iv: return "IV";
  }
  return "?";
}

inline ComplianceMode parse_compliance_mode(std::string_view s) {
  if (s == "binary") return ComplianceMode::binary;
  if (s == "partial") return ComplianceMode::partial;
  throw std::invalid_argument("unknown compliance mode: " + std::string(s));
}

inline NoncomplierTypes parse_noncomplier_types(std::string_view s) {
  if (s == "nt") return NoncomplierTypes::nt_only;
  if (s == "nt-at" || s == "nt_at") return NoncomplierTypes::nt_at;
  throw std::invalid_argument("unknown non-complier types: " + std::string(s));
}

inline Scenario parse_scenario(std::string_view s) {
  if (s == "random") return Scenario::random;
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'H')
    return static_cast<Scenario>(1 + (s[0] - 'A'));
  throw std::invalid_argument("unknown scenario: " + std::string(s));
}

inline ThresholdCase parse_threshold_case(std::string_view s) {
  if (s == "I") return ThresholdCase::I;
  if (s == "II") return ThresholdCase::II;
  if (s == "III") return ThresholdCase::III;
  if (s == "IV") return ThresholdCase::IV;
  throw std::invalid_argument("unknown threshold case: " + std::string(s));
}

inline Method parse_method(std::string_view s) {
  if (s == "ITT") return Method::itt;
  if (s == "PP") return Method::pp;
  if (s == "IV") return Method::iv;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

}  // namespace cace
