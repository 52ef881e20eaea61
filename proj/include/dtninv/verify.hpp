#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtninv {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

const std::vector<std::string>& verify_suites();

/// Runs one suite: fem, adjoint, dtn, neural or metrics.
std::vector<CheckResult> run_verify_suite(const std::string& suite);

/// One JSON object per line.
void print_checks(std::ostream& os, const std::vector<CheckResult>& checks);

/// Observed L2 convergence rates of the P1 solution for the manufactured
/// solution with k = 1, a = b = 1 on unit-square meshes of the given sizes.
std::vector<double> fem_convergence_rates(const std::vector<int>& sizes);

} // namespace dtninv
