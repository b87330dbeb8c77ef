/* Copyright 2026 The locopipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef LOCOPIPE_RUN_MODE_HPP_
#define LOCOPIPE_RUN_MODE_HPP_

#include <optional>
#include <string_view>

namespace locopipe {

// E2E: one global forward/backward/update per batch.
// NaivePP: stages pipelined forward, then one synchronous backward chain.
// PPLL: every stage runs forward, local backward and update independently.
enum class RunMode { kE2E, kNaivePP, kPPLL };

inline constexpr RunMode kAllRunModes[] = {RunMode::kE2E, RunMode::kNaivePP,
                                           RunMode::kPPLL};

std::string_view RunModeName(RunMode mode);
// Accepts "E2E", "NaivePP" and "PPLL" (case-sensitive).
std::optional<RunMode> ParseRunMode(std::string_view name);

}  // namespace locopipe

#endif  // LOCOPIPE_RUN_MODE_HPP_
