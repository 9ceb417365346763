#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balpoe/core.hpp"
#include "balpoe/mixture.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

/// Feature matrix with integer labels and cached per-class counts.
struct Dataset {
  Matrix features;               // N x d
  std::vector<int> labels;       // N entries in [0, C)
  std::vector<long long> counts; // per-class sample counts n_j

  int size() const { return features.rows; }
  int dim() const { return features.cols; }
  int num_classes() const { return static_cast<int>(counts.size()); }

  /// Recomputes counts from labels for C classes.
  void recount(int num_classes);
};

/// Many / medium / few class-index groups, split by training counts:
/// > 100 samples -> many, 20..100 -> medium, < 20 -> few.
struct GroupPartition {
  std::vector<int> many;
  std::vector<int> medium;
  std::vector<int> few;
};

/// Draws N labeled points from the mixture. Labels are i.i.d. from
/// mix.prior (inverse CDF), features from the class Gaussian. Each sample
/// uses its own derived RNG stream, so generation parallelizes over the
/// index space with results independent of thread count.
Dataset sample_dataset(const GaussianMixture& mix, int N, std::uint64_t seed);

/// Per-class subsample of `test` without replacement whose counts are
/// proportional (after rounding) to `target`, with the largest feasible
/// total size. Selected rows keep their original order, so features and
/// labels survive verbatim. Deterministic given seed.
Dataset resample_shifted(const Dataset& test, const LabelDistribution& target,
                         std::uint64_t seed);

GroupPartition group_partition(const std::vector<long long>& counts);

/// CSV rows are f1,...,fd,label; lines starting with '#' are metadata
/// comments and are skipped on load.
void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& comment_header);
Dataset load_dataset_csv(const std::string& path, int num_classes);

}  // namespace balpoe
