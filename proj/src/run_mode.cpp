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
#include "locopipe/run_mode.hpp"

namespace locopipe {

std::string_view RunModeName(RunMode mode) {
  switch (mode) {
    case RunMode::kE2E: return "E2E";
    case RunMode::kNaivePP: return "NaivePP";
    case RunMode::kPPLL: return "PPLL";
  }
  return "?";
}

std::optional<RunMode> ParseRunMode(std::string_view name) {
  for (RunMode m : kAllRunModes) {
    if (RunModeName(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace locopipe
