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

#ifndef BEATVOX_CORE_EVAL_HPP_
#define BEATVOX_CORE_EVAL_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pipeline.hpp"

namespace beatvox {

inline constexpr double kDefaultTolerance = 0.050;

// Lines of "time<TAB or comma>label"; '#' comments and blank lines skipped.
// Result is time-sorted with lower-case labels.
std::vector<DrumEvent> parse_annotations(std::string_view text);
std::string format_annotations(const std::vector<DrumEvent>& events);

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred, ref)
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_ref;
  double tolerance = kDefaultTolerance;
};

// Label-blind greedy matching in order of increasing |dt| (compared at
// nanosecond resolution); ties go to the earlier reference, then the earlier
// prediction.
Matching match_events(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref,
                      double tolerance = kDefaultTolerance);

struct ClassScore {
  std::string label;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t reference = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

struct EditOperations {
  std::size_t modify = 0;
  std::size_t add = 0;
  std::size_t remove = 0;
  std::size_t total() const { return modify + add + remove; }
};

// Classes in report order: kick, snare, hihat first, then by name.
std::vector<ClassScore> f_measures(const Matching& matching, const std::vector<DrumEvent>& pred,
                                   const std::vector<DrumEvent>& ref);
EditOperations edit_operations(const Matching& matching, const std::vector<DrumEvent>& pred,
                               const std::vector<DrumEvent>& ref);

struct EvalReport {
  std::vector<ClassScore> classes;
  EditOperations edits;
  std::size_t predicted = 0;
  std::size_t reference = 0;
  std::size_t matched = 0;

  const ClassScore* find(std::string_view label) const;
};

EvalReport evaluate(const std::vector<DrumEvent>& pred, const std::vector<DrumEvent>& ref,
                    double tolerance = kDefaultTolerance);

enum class ReportFormat { kText, kCsv };

std::string render_report(const EvalReport& report, ReportFormat format);

// "Kick", "Snare", "Hi-hat"; other labels are capitalised.
std::string display_name(std::string_view label);

}  // namespace beatvox

#endif  // BEATVOX_CORE_EVAL_HPP_
