// Copyright 2026 The beatvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exhaustive matching oracle and random instance generator for the scoring
// tests. Small instances only: the search is exponential.

#ifndef BEATVOX_TESTS_EVAL_ORACLE_HPP_
#define BEATVOX_TESTS_EVAL_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace beatvox::testing::oracle {

struct Best {
  int pairs = -1;
  int correct = -1;
};

// Maximum-cardinality matching, then most label agreements.
inline void search(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref, double tol,
                   std::size_t r, std::vector<bool>& used, int pairs, int correct, Best& best) {
  if (r == ref.size()) {
    if (pairs > best.pairs || (pairs == best.pairs && correct > best.correct)) best = {pairs, correct};
    return;
  }
  search(pred, ref, tol, r + 1, used, pairs, correct, best);
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (used[p] || std::abs(pred[p].time - ref[r].time) > tol) continue;
    used[p] = true;
    search(pred, ref, tol, r + 1, used, pairs + 1, correct + (pred[p].label == ref[r].label), best);
    used[p] = false;
  }
}

inline Best optimal(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref, double tol) {
  Best b;
  std::vector<bool> used(pred.size(), false);
  search(pred, ref, tol, 0, used, 0, 0, b);
  return b;
}

// Per-class F straight from the definitions, given per-class true positives.
inline std::map<std::string, double> f_from_counts(const std::vector<DrumEvent>& pred,
                                                   const std::vector<DrumEvent>& ref,
                                                   const std::map<std::string, int>& tp) {
  std::map<std::string, int> np, nr;
  for (const auto& e : pred) ++np[e.label];
  for (const auto& e : ref) ++nr[e.label];
  std::map<std::string, double> f;
  for (const auto* m : {&np, &nr})
    for (const auto& [label, n] : *m) {
      (void)n;
      const double t = tp.count(label) ? tp.at(label) : 0;
      const double p = np[label] ? t / np[label] : 0.0;
      const double rr = nr[label] ? t / nr[label] : 0.0;
      f[label] = p + rr > 0 ? 2 * p * rr / (p + rr) : 0.0;
    }
  return f;
}

struct Instance {
  std::vector<DrumEvent> pred, ref;
};

// References spaced more than 2*tol apart; predictions jittered, dropped,
// relabelled or spurious. Jitters are distinct multiples of 1 ms.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, double tol) {
  static const char* labels[] = {"kick", "snare", "hihat"};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  double t = 0.2 + u(rng);
  std::vector<int> jitters;
  for (int j = -int(tol * 1000) + 1; j < int(tol * 1000); ++j) jitters.push_back(j);
  std::shuffle(jitters.begin(), jitters.end(), rng);
  std::size_t next_jitter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string label = labels[rng() % 3];
    in.ref.push_back({t, label, 100});
    const double roll = u(rng);
    if (roll > 0.15) {
      const double dt = jitters[next_jitter++ % jitters.size()] / 1000.0;
      const std::string pl = u(rng) < 0.2 ? labels[rng() % 3] : label;
      in.pred.push_back({t + dt, pl, 100});
    }
    if (u(rng) < 0.15) in.pred.push_back({t + tol * 2.2 + 0.01 * u(rng), labels[rng() % 3], 100});
    t += 2.5 * tol + 0.05 + u(rng);
  }
  std::sort(in.pred.begin(), in.pred.end(), [](auto& a, auto& b) { return a.time < b.time; });
  return in;
}

}  // namespace beatvox::testing::oracle

#endif  // BEATVOX_TESTS_EVAL_ORACLE_HPP_
