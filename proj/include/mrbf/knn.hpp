// K-nearest-neighbor classification over standardized feature vectors, and
// the center selection used to seed RBF branches.
#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/moments.hpp"
#include "mrbf/rng.hpp"

namespace mrbf {

struct LabeledSample {
  FeatureVector features;  // standardized
  char label = 0;
  std::string category;
  std::string group;
};

struct LabeledDataset {
  std::vector<LabeledSample> samples;
  Standardization standardization;
  FeatureKind kind = FeatureKind::full;
};

enum class DistanceMetric { euclidean, manhattan };

inline DistanceMetric metric_from_name(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "manhattan") return DistanceMetric::manhattan;
  throw std::invalid_argument("unknown metric: " + s);
}

inline std::string metric_name(DistanceMetric m) {
  return m == DistanceMetric::euclidean ? "euclidean" : "manhattan";
}

inline double feature_distance(const std::vector<double>& a, const std::vector<double>& b,
                               DistanceMetric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("feature_distance: dimension mismatch");
  double acc = 0.0;
  if (metric == DistanceMetric::euclidean) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
  char label = 0;
};

struct KnnResult {
  char label = 0;
  std::vector<Neighbor> neighbors;  // the k nearest, closest first
};

// Majority label among the k nearest. Ties: smaller mean distance within the
// tied labels, then lexicographically smaller label.
inline KnnResult knn_classify(const FeatureVector& query, const LabeledDataset& train, int k,
                              DistanceMetric metric) {
  if (train.samples.empty()) throw std::domain_error("knn_classify: empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > train.samples.size())
    throw std::invalid_argument("knn_classify: k outside [1, train size]");

  std::vector<Neighbor> all;
  all.reserve(train.samples.size());
  for (std::size_t i = 0; i < train.samples.size(); ++i)
    all.push_back({i, feature_distance(query.values, train.samples[i].features.values, metric),
                   train.samples[i].label});
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  all.resize(static_cast<std::size_t>(k));

  std::map<char, std::pair<int, double>> votes;  // label -> (count, distance sum)
  for (const Neighbor& n : all) {
    auto& v = votes[n.label];
    v.first += 1;
    v.second += n.distance;
  }
  char best = 0;
  int best_count = -1;
  double best_mean = 0.0;
  for (const auto& [label, v] : votes) {
    const double mean = v.second / v.first;
    if (v.first > best_count || (v.first == best_count && mean < best_mean)) {
      best = label;
      best_count = v.first;
      best_mean = mean;
    }
    // equal count and mean: std::map iterates labels in order, keep the first
  }
  return {best, std::move(all)};
}

// Correct-classification percentage (0..100).
inline double evaluate_knn(const LabeledDataset& train, const LabeledDataset& test, int k,
                           DistanceMetric metric) {
  if (test.samples.empty()) throw std::domain_error("evaluate_knn: empty test set");
  int correct = 0;
  for (const auto& s : test.samples)
    if (knn_classify(s.features, train, k, metric).label == s.label) ++correct;
  return 100.0 * correct / static_cast<double>(test.samples.size());
}

// ---------------------------------------------------------------------------
// Center selection for RBF branches.

enum class CenterMode { class_means, random_subset };

inline CenterMode center_mode_from_name(const std::string& s) {
  if (s == "class_means") return CenterMode::class_means;
  if (s == "random_subset") return CenterMode::random_subset;
  throw std::invalid_argument("unknown center mode: " + s);
}

struct ClusterCenter {
  std::vector<double> position;
  std::string group;
  char label = 0;  // source label (class_means) or drawn sample's label
};

// class_means: one center per expected label (mean of its samples).
// random_subset: a seeded draw of up to per_group_cap training points per group.
inline std::vector<ClusterCenter> cluster_centers(const LabeledDataset& train, CenterMode mode,
                                                  int per_group_cap, std::uint64_t seed,
                                                  std::vector<char> expected_labels = {}) {
  if (per_group_cap < 1) throw std::invalid_argument("cluster_centers: per_group_cap < 1");
  if (train.samples.empty()) throw std::domain_error("cluster_centers: empty training set");

  if (expected_labels.empty()) {
    for (const auto& s : train.samples) expected_labels.push_back(s.label);
    std::sort(expected_labels.begin(), expected_labels.end());
    expected_labels.erase(std::unique(expected_labels.begin(), expected_labels.end()),
                          expected_labels.end());
  }

  std::vector<ClusterCenter> centers;
  if (mode == CenterMode::class_means) {
    for (char label : expected_labels) {
      std::vector<double> mean;
      std::string group;
      int count = 0;
      for (const auto& s : train.samples) {
        if (s.label != label) continue;
        if (mean.empty()) mean.assign(s.features.values.size(), 0.0);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s.features.values[i];
        group = s.group;
        ++count;
      }
      if (count == 0)
        throw std::domain_error(std::string("cluster_centers: no samples for label '") + label +
                                "'");
      for (double& v : mean) v /= count;
      centers.push_back({std::move(mean), std::move(group), label});
    }
    return centers;
  }

  // random_subset, grouped by group id in sorted order for determinism
  std::map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < train.samples.size(); ++i)
    by_group[train.samples[i].group].push_back(i);
  std::uint64_t group_index = 0;
  for (auto& [group, indices] : by_group) {
    Rng rng(mix_seed(seed, group_index++));
    rng.shuffle(indices);
    const std::size_t take = std::min<std::size_t>(indices.size(), per_group_cap);
    std::vector<std::size_t> chosen(indices.begin(), indices.begin() + take);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen)
      centers.push_back(
          {train.samples[idx].features.values, group, train.samples[idx].label});
  }
  return centers;
}

}  // namespace mrbf
