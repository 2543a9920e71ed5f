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

#include "learn.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include "error.hpp"

namespace beatvox {

std::size_t LabeledDataset::distinct_labels() const {
  return std::set<std::size_t>(labels.begin(), labels.end()).size();
}

void LabeledDataset::validate() const {
  if (vectors.size() != labels.size())
    throw Error(ErrorKind::kInvalidArgument, "vector and label counts differ");
  for (std::size_t l : labels)
    if (l >= class_names.size())
      throw Error(ErrorKind::kInvalidArgument, "label outside class list");
  for (const auto& v : vectors)
    for (double x : v.values)
      if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidArgument, "non-finite feature value");
}

Normalizer fit_normalizer(const LabeledDataset& dataset) {
  if (dataset.vectors.empty())
    throw Error(ErrorKind::kInvalidArgument, "cannot fit a normalizer on no data");
  Normalizer norm;
  const double n = static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double first = dataset.vectors.front().values[j];
    bool constant = true;
    double sum = 0.0;
    for (const auto& v : dataset.vectors) {
      sum += v.values[j];
      constant = constant && v.values[j] == first;
    }
    if (constant) {
      norm.mean[j] = first;
      norm.std[j] = 0.0;
      continue;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& v : dataset.vectors) ss += (v.values[j] - mean) * (v.values[j] - mean);
    norm.mean[j] = mean;
    norm.std[j] = std::sqrt(ss / n);
  }
  return norm;
}

FeatureArray normalize(const FeatureVector& vector, const Normalizer& norm) {
  FeatureArray z{};
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    z[j] = norm.std[j] > 0.0 ? (vector.values[j] - norm.mean[j]) / norm.std[j] : 0.0;
  return z;
}

void check_mask(const FeatureMask& mask) {
  if (mask.empty()) throw Error(ErrorKind::kInvalidArgument, "feature mask is empty");
  for (std::size_t j : mask)
    if (j >= kFeatureCount)
      throw Error(ErrorKind::kInvalidArgument, "feature index out of range");
}

// ---------------------------------------------------------------------------

KnnIndex::KnnIndex(const LabeledDataset& dataset, const Normalizer& norm)
    : dataset_(dataset) {
  points_.reserve(dataset.size());
  for (const auto& v : dataset.vectors) points_.push_back(normalize(v, norm));
}

Classification KnnIndex::classify(const FeatureArray& z, const FeatureMask& mask,
                                  std::size_t k,
                                  std::optional<std::size_t> exclude) const {
  check_mask(mask);
  const std::size_t available = points_.size() - (exclude ? 1 : 0);
  if (k < 1 || k > available)
    throw Error(ErrorKind::kInvalidArgument,
                "k=" + std::to_string(k) + " outside [1, " + std::to_string(available) + "]");

  std::vector<Neighbour> all;
  all.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (exclude && *exclude == i) continue;
    double ss = 0.0;
    for (std::size_t j : mask) {
      const double d = z[j] - points_[i][j];
      ss += d * d;
    }
    all.push_back({i, std::sqrt(ss)});
  }
  // Distance ties go to the lower training index.
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Neighbour& a, const Neighbour& b) {
                      return a.distance < b.distance ||
                             (a.distance == b.distance && a.index < b.index);
                    });
  all.resize(k);

  const std::size_t classes = dataset_.class_names.size();
  std::vector<std::size_t> votes(classes, 0);
  std::vector<double> summed(classes, 0.0);
  for (const auto& nb : all) {
    const std::size_t c = dataset_.labels[nb.index];
    ++votes[c];
    summed[c] += nb.distance;
  }
  // Most votes, then smallest summed distance, then class order.
  std::size_t best = classes;
  for (std::size_t c = 0; c < classes; ++c) {
    if (votes[c] == 0) continue;
    if (best == classes || votes[c] > votes[best] ||
        (votes[c] == votes[best] && summed[c] < summed[best]))
      best = c;
  }
  return {best, std::move(all)};
}

Classification knn_classify(const LabeledDataset& dataset, const Normalizer& norm,
                            const FeatureMask& mask, std::size_t k,
                            const FeatureVector& query) {
  dataset.validate();
  check_mask(mask);
  KnnIndex index(dataset, norm);
  return index.classify(normalize(query, norm), mask, k);
}

std::size_t loo_correct(const LabeledDataset& dataset, const FeatureMask& mask,
                        std::size_t k) {
  if (dataset.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "leave-one-out needs at least two items");
  dataset.validate();
  const KnnIndex index(dataset, fit_normalizer(dataset));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (index.classify(index.point(i), mask, k, i).label == dataset.labels[i]) ++correct;
  return correct;
}

double loo_accuracy(const LabeledDataset& dataset, const FeatureMask& mask, std::size_t k) {
  return static_cast<double>(loo_correct(dataset, mask, k)) /
         static_cast<double>(dataset.size());
}

SelectionResult sfs_select(const LabeledDataset& dataset, std::size_t k) {
  if (dataset.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "feature selection needs at least two items");
  dataset.validate();
  if (dataset.distinct_labels() < 2)
    throw Error(ErrorKind::kInvalidArgument, "feature selection needs at least two classes");

  const double n = static_cast<double>(dataset.size());
  SelectionResult result;
  std::vector<bool> used(kFeatureCount, false);
  std::size_t current = 0;

  while (result.selected.size() < kFeatureCount) {
    // Candidates are scored concurrently; admission stays sequential.
    std::vector<std::future<std::size_t>> scores(kFeatureCount);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      if (used[j]) continue;
      FeatureMask trial = result.selected;
      trial.push_back(j);
      scores[j] = std::async(std::launch::async, [&dataset, trial = std::move(trial), k] {
        return loo_correct(dataset, trial, k);
      });
    }
    std::size_t best = kFeatureCount;
    std::size_t best_score = 0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      if (used[j]) continue;
      const std::size_t s = scores[j].get();
      if (best == kFeatureCount || s > best_score) {
        best = j;
        best_score = s;
      }
    }
    if (!result.selected.empty() && best_score <= current) break;
    used[best] = true;
    current = best_score;
    result.selected.push_back(best);
    result.accuracy_trace.push_back(static_cast<double>(best_score) / n);
  }
  result.final_accuracy = result.accuracy_trace.back();
  return result;
}

}  // namespace beatvox
