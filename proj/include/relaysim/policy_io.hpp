#pragma once

#include <iosfwd>
#include <string>

#include "relaysim/policy.hpp"

namespace relaysim {

/// Policy document: N, tau, q1, q2, thresholds, per-stage residuals and
/// value grids. Doubles render with shortest round-trip precision, so the
/// threshold array survives save/load bit-exactly.
void save_policy(const ThresholdPolicy& policy, std::ostream& os);
void save_policy_file(const ThresholdPolicy& policy, const std::string& path);

ThresholdPolicy load_policy(std::istream& is);
ThresholdPolicy load_policy_file(const std::string& path);

}  // namespace relaysim
