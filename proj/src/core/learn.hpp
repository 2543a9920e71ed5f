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

#ifndef BEATVOX_CORE_LEARN_HPP_
#define BEATVOX_CORE_LEARN_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "features.hpp"

namespace beatvox {

using FeatureArray = std::array<double, kFeatureCount>;
using FeatureMask = std::vector<std::size_t>;

// Labels are indices into class_names; class order breaks classifier ties.
struct LabeledDataset {
  std::vector<FeatureVector> vectors;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return vectors.size(); }
  std::size_t distinct_labels() const;
  // Throws unless sizes agree and every label names a class.
  void validate() const;
};

struct Normalizer {
  FeatureArray mean{};
  FeatureArray std{};  // 0 for features constant over the training set
};

Normalizer fit_normalizer(const LabeledDataset& dataset);
FeatureArray normalize(const FeatureVector& vector, const Normalizer& norm);

struct Neighbour {
  std::size_t index = 0;
  double distance = 0.0;
};

struct Classification {
  std::size_t label = 0;
  std::vector<Neighbour> neighbours;  // the k nearest, closest first
};

void check_mask(const FeatureMask& mask);

Classification knn_classify(const LabeledDataset& dataset, const Normalizer& norm,
                            const FeatureMask& mask, std::size_t k,
                            const FeatureVector& query);

// Normalised training matrix for repeated queries.
class KnnIndex {
 public:
  KnnIndex(const LabeledDataset& dataset, const Normalizer& norm);

  // `exclude` drops one training item (leave-one-out).
  Classification classify(const FeatureArray& z, const FeatureMask& mask,
                          std::size_t k,
                          std::optional<std::size_t> exclude = std::nullopt) const;
  const FeatureArray& point(std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }

 private:
  const LabeledDataset& dataset_;
  std::vector<FeatureArray> points_;
};

std::size_t loo_correct(const LabeledDataset& dataset, const FeatureMask& mask,
                        std::size_t k);
double loo_accuracy(const LabeledDataset& dataset, const FeatureMask& mask,
                    std::size_t k);

struct SelectionResult {
  FeatureMask selected;               // admission order
  std::vector<double> accuracy_trace; // LOO accuracy after each admission
  double final_accuracy = 0.0;
};

SelectionResult sfs_select(const LabeledDataset& dataset, std::size_t k);

}  // namespace beatvox

#endif  // BEATVOX_CORE_LEARN_HPP_
