#pragma once

// Numbered verification suites. Each returns a pass/fail verdict with a
// one-line summary and detail lines; runtimes are measured by the suite and
// compared against its limit.

#include "cgd/harness.hpp"

#include <string>
#include <vector>

namespace cgd::verify {

struct CheckResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  std::vector<std::string> details;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

CheckResult closed_form_nash(std::uint64_t seed = 1);
CheckResult series_recovery(std::uint64_t seed = 2);
CheckResult polynomial_bilinear();
CheckResult polynomial_quadratic();
CheckResult theorem_bound(std::uint64_t seed = 5);
/// Writes traces and summary into output_dir when nonempty.
CheckResult covariance(const std::string& output_dir = "");
CheckResult cg_degradation();
CheckResult gan(const std::string& output_dir = "");
CheckResult oracle_hygiene(std::uint64_t seed = 9);

/// Criteria 1-9 in order.
std::vector<CheckResult> all(const std::string& output_dir = "");
/// The suites that finish in seconds (1, 2, 3, 4, 5, 7, 9).
std::vector<CheckResult> fast();

/// "PASS <id> <title>: <summary> [<t> s]"
std::string format(const CheckResult& r, bool with_details);

}  // namespace cgd::verify
