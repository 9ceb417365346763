#pragma once

#include "balpoe/core.hpp"
#include "balpoe/rng.hpp"

namespace balpoe {

struct MixupConfig {
  bool enabled = false;
  double alpha = 0.4;  // Beta concentration, must be > 0 when enabled
};

/// A vicinal batch: convex combinations of feature rows and of the one-hot
/// labels of the recorded source pair (src_a[i], src_b[i]).
struct MixedBatch {
  Matrix features;      // B x d
  Matrix soft_labels;   // B x C, row-stochastic, at most 2 nonzeros per row
  Vector xi;            // B mixing coefficients in [0, 1]
  std::vector<int> src_a;
  std::vector<int> src_b;
};

/// One draw from Beta(alpha, alpha), realized as G1 / (G1 + G2) with
/// G ~ Gamma(alpha, 1); robust for alpha < 1.
double beta_sample(double alpha, SplitMix64& rng);

/// Pairs each row with a uniformly permuted partner from the same batch and
/// mixes features and one-hot labels with one Beta(alpha, alpha) draw per
/// pair. A disabled config is the exact identity (xi = 1, one-hot labels).
MixedBatch mix_batch(const Matrix& features, const std::vector<int>& labels,
                     int num_classes, const MixupConfig& cfg, SplitMix64& rng);

}  // namespace balpoe
