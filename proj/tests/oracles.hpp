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
// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the tape, so a bug in the library cannot hide
// behind the same bug in its checker.

#ifndef LOCOPIPE_TESTS_ORACLES_HPP_
#define LOCOPIPE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace locopipe::testing {

// Row-major triple loop, [m x k] * [k x n].
inline std::vector<double> NaiveMatMul(std::span<const double> a,
                                       std::span<const double> b,
                                       std::size_t m, std::size_t k,
                                       std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
  return c;
}

// Central differences of `loss` with respect to every entry of `values`,
// which the callback must read through.
inline std::vector<double> CentralDiff(const std::function<double()>& loss,
                                       std::span<double> values,
                                       double eps = 1e-5) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = loss();
    values[i] = saved - eps;
    const double down = loss();
    values[i] = saved;
    out[i] = (up - down) / (2.0 * eps);
  }
  return out;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps entries that
// are both essentially zero from dominating through division noise.
inline double MaxRelError(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-6) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline std::vector<double> RandomValues(std::mt19937_64& rng, std::size_t n,
                                        double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

// Reference softmax cross-entropy, mean over rows.
inline double NaiveXent(std::span<const double> logits, std::size_t rows,
                        std::size_t cols, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, logits[r * cols + c]);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(logits[r * cols + c] - mx);
    total += std::log(z) + mx - logits[r * cols + labels[r]];
  }
  return total / static_cast<double>(rows);
}

// Smallest achievable max stage cost over every contiguous split of `costs`
// into `stages` non-empty groups, plus the lexicographically earliest cut
// vector achieving it. Exhaustive; intended for at most ~10 layers.
struct BruteSplit {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cuts;  // stage j starts at cuts[j]
};

inline void BruteRecurse(std::span<const double> costs, std::size_t stages,
                         std::vector<std::size_t>& cuts, BruteSplit& out) {
  if (cuts.size() == stages) {
    double worst = 0.0;
    for (std::size_t j = 0; j < stages; ++j) {
      const std::size_t end = j + 1 < stages ? cuts[j + 1] : costs.size();
      double c = 0.0;
      for (std::size_t l = cuts[j]; l < end; ++l) c += costs[l];
      worst = std::max(worst, c);
    }
    // Enumeration is lexicographic, so strict improvement keeps the earliest.
    if (worst < out.best) {
      out.best = worst;
      out.cuts = cuts;
    }
    return;
  }
  const std::size_t remaining = stages - cuts.size();
  for (std::size_t start = cuts.back() + 1;
       start + remaining <= costs.size(); ++start) {
    cuts.push_back(start);
    BruteRecurse(costs, stages, cuts, out);
    cuts.pop_back();
  }
}

inline BruteSplit BrutePartition(std::span<const double> costs,
                                 std::size_t stages) {
  BruteSplit out;
  std::vector<std::size_t> cuts = {0};
  BruteRecurse(costs, stages, cuts, out);
  return out;
}

}  // namespace locopipe::testing

#endif  // LOCOPIPE_TESTS_ORACLES_HPP_
