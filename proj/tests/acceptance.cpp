// Runs the nine acceptance criteria and prints one PASS/FAIL line for each,
// followed by indented detail lines. Optional argument: output directory for
// the covariance and GAN artifacts.

#include "cgd/verify.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "";
  int failed = 0;
  auto report = [&](const cgd::verify::CheckResult& r) {
    std::printf("%s\n", cgd::verify::format(r, true).c_str());
    std::fflush(stdout);
    failed += !r.passed;
  };
  using namespace cgd::verify;
  report(closed_form_nash());
  report(series_recovery());
  report(polynomial_bilinear());
  report(polynomial_quadratic());
  report(theorem_bound());
  report(covariance(out.empty() ? out : out + "/covariance"));
  report(cg_degradation());
  report(gan(out.empty() ? out : out + "/gan"));
  report(oracle_hygiene());
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
