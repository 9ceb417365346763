#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "balpoe/core.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

/// Isotropic Gaussian mixture with one component per class and a shared
/// standard deviation. The shared-sigma choice makes the Bayes-balanced
/// decision boundary an analytic hyperplane arrangement, which the
/// consistency tests rely on.
struct GaussianMixture {
  int num_classes = 0;
  int dim = 0;
  std::vector<Vector> means;  // one d-vector per class
  double sigma = 1.0;
  LabelDistribution prior;

  void validate() const;
};

/// Deterministic mean layout: classes on a circle of radius `separation`
/// in the first two feature dimensions (for dim == 1, equally spaced on
/// the line). Means are pairwise distinct for separation > 0.
GaussianMixture make_mixture(int num_classes, int dim, double separation, double sigma,
                             LabelDistribution prior);

/// log N(x; mean_y, sigma^2 I), including the normalization constant.
double gaussian_log_likelihood(const GaussianMixture& mix, const double* x, int y);

/// Posterior P(y|x) under the mixture prior, or under `prior_override`
/// when given (the label-shift family: the likelihood never changes).
LabelDistribution bayes_posterior(const GaussianMixture& mix, const double* x,
                                  const std::optional<LabelDistribution>& prior_override = {});

/// Writes the posterior's log-probabilities-up-to-a-constant into `out`:
/// out[y] = log P(x|y) + log prior[y]. Softmax of this equals
/// bayes_posterior.
void bayes_log_joint(const GaussianMixture& mix, const double* x,
                     const LabelDistribution& prior, double* out);

/// argmax_y P(x|y): the Bayes-optimal rule for balanced error. Ties break
/// toward the lowest class index.
int bayes_balanced_classifier(const GaussianMixture& mix, const double* x);

}  // namespace balpoe
