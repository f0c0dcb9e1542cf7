#pragma once

// Cross-module consistency checks run by `aoisched verify`.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aoi::verify {

struct CheckResult {
  std::string identity;  // e.g. "arq.cost_of_threshold == exact chain cost"
  bool passed = false;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;
  long cases = 0;
  std::string detail;      // first failing case, if any
};

struct Options {
  bool quick = false;
  // Names an identity whose closed-form side is scaled by 1 + 1e-3, so the
  // report must flag it. Empty: no perturbation.
  std::string perturb;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

/// Identifiers accepted by Options::perturb.
std::vector<std::string> identities();

std::vector<CheckResult> run_all(const Options& opts);

bool all_passed(std::span<const CheckResult> results);

void write_report(std::ostream& os, std::span<const CheckResult> results);

}  // namespace aoi::verify
