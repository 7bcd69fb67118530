// Copyright 2026 The wsrglow-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsrglow/flow/model.hpp"

namespace wsrglow::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0;      // measured error
  double tolerance = 0;  // pass when value < tolerance (or <= for bounds)
  std::string detail;
  double seconds = 0;
};

struct SelftestOptions {
  /// Negates coupling log-det terms in the Jacobian check; that check must
  /// then fail.
  bool flip_coupling_log_det = false;
};

/// Gradient check, round trip, Jacobian log-det, metric oracles and mu-law
/// round trip on tiny double-precision instances.
std::vector<CheckResult> run_selftest(const SelftestOptions& options = {});

std::string format_results(const std::vector<CheckResult>& results);

/// Gives a freshly initialised model non-trivial couplings: the zero end
/// convolutions get N(0, end_std^2) entries and every mix matrix receives
/// N(0, mix_std^2) noise.
template <typename T>
void randomize_for_testing(flow::Model<T>& model, std::uint64_t seed, double end_std, double mix_std);

}  // namespace wsrglow::cli
