#pragma once

// The verification suite behind `wildpost check`: every analytic result is
// compared against an independent oracle at a pinned tolerance.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

inline constexpr std::uint64_t kReferenceSeed = 1;

struct CheckResult {
  std::string target;  // "core" or a target name
  std::string name;
  double metric;
  double threshold;
  bool pass;  // metric <= threshold
};

struct CheckOptions {
  /// Run only this target's checks ("core" for the shared primitives).
  std::optional<std::string> target;
  std::uint64_t seed = kReferenceSeed;
  /// Applied to every target before its gradient check.
  std::function<std::unique_ptr<Target>(std::unique_ptr<Target>)> decorate;
};

std::vector<CheckResult> run_checks(const CheckOptions& options = {});

/// Max over coordinates and points of |analytic - fd| / max(1, |analytic|)
/// at `points` uniform draws from [-2, 2]^d in unconstrained space.
double gradient_fd_error(const Target& target, std::uint64_t seed, int points = 20, double h = 1e-5);

/// `PASS|FAIL <target>.<name> <metric> <threshold>` per line.
void print_report(const std::vector<CheckResult>& results, std::ostream& out);
void print_report_json(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace wildpost
