// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mxisac/opt_manifold.hpp"

namespace mxisac {

using GradVFn = std::function<CMatrix(const ManifoldState&, const EigB&, double)>;

struct ValidateOptions {
  bool quick = false;
  std::uint64_t seed = 1;
  /// Replaces grad_V inside the finite-difference check (mutation canary).
  GradVFn grad_V_override;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double wall_ms = 0.0;
};

struct ValidateReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::string text() const;
  std::string csv() const;
};

/// Cross-module invariant suite at desk scale.
ValidateReport validate(const ValidateOptions& options = {});

}  // namespace mxisac
