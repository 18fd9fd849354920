// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace robin {

/// Negative Robin eigenvalues at one value of beta.
struct EigenResult {
  double beta = 0.0;
  std::vector<double> eigenvalues;      // ascending
  std::vector<double> error_estimate;   // per eigenvalue; zero for exact oracles
  std::string mesh_id;
};

}  // namespace robin
