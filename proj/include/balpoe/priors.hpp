#pragma once

#include <vector>

#include "balpoe/core.hpp"

namespace balpoe {

/// A strictly positive probability vector over C classes. Construction
/// validates the invariants: entries > 0 and sum within 1e-12 of 1.
struct LabelDistribution {
  Vector probs;

  LabelDistribution() = default;
  explicit LabelDistribution(Vector p);

  int num_classes() const { return static_cast<int>(probs.size()); }
  double operator[](int y) const { return probs[y]; }

  /// Componentwise log of the probabilities.
  Vector log() const;
};

/// Per-class exponent vector; tau = 1 - lambda componentwise.
struct LambdaVector {
  Vector lambda;

  LambdaVector() = default;
  explicit LambdaVector(Vector v);
  /// Scalar lambda as a constant vector over C classes.
  LambdaVector(double scalar, int C);

  int num_classes() const { return static_cast<int>(lambda.size()); }
  Vector tau() const;
};

/// The ordered multiset of expert parameterizations and its mean.
struct EnsembleSpec {
  std::vector<LambdaVector> experts;
  Vector lambda_bar;

  int num_experts() const { return static_cast<int>(experts.size()); }
  int num_classes() const { return static_cast<int>(lambda_bar.size()); }
};

/// Uniform distribution over C classes.
LabelDistribution uniform_prior(int C);

/// Exponential-decay long-tailed profile: probs[i] proportional to
/// rho^(-i/(C-1)), so probs[0]/probs[C-1] == rho exactly.
LabelDistribution lt_exponential_prior(int C, double rho);

/// Ranked power-law profile: probs[i] proportional to (i+1)^(-1/alpha).
LabelDistribution pareto_prior(int C, double alpha);

/// Empirical prior from per-class counts with additive smoothing
/// (count + 1e-12) so every log is finite.
LabelDistribution empirical_prior(const std::vector<long long>& counts);

/// The shifted distribution P^lambda: probs[y] = p[y]^lambda[y] / sum_j
/// p[j]^lambda[j], computed in log space with max subtraction.
LabelDistribution lambda_prior(const LabelDistribution& p_train, const LambdaVector& lam);

/// Pairwise class margins: delta[y][j] = tau[j] log p[j] - tau[y] log p[y].
Matrix margin_matrix(const LabelDistribution& p_train, const Vector& tau);

/// The mean lambda that retargets p_train to p_test:
/// lambda_bar[y] = log(p_test[y] / p_train[y]).
Vector target_lambda_bar(const LabelDistribution& p_train, const LabelDistribution& p_test);

/// Bundles lambda vectors into an EnsembleSpec; lambda_bar is their
/// componentwise mean.
EnsembleSpec make_ensemble_spec(const std::vector<LambdaVector>& lambdas);

/// probs reversed in class order (backward long-tailed profile).
LabelDistribution reversed(const LabelDistribution& p);

}  // namespace balpoe
