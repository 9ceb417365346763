#include "balpoe/mixture.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "balpoe/kernels.hpp"

namespace balpoe {

void GaussianMixture::validate() const {
  if (num_classes < 1) throw std::invalid_argument("GaussianMixture: num_classes >= 1");
  if (dim < 1) throw std::invalid_argument("GaussianMixture: dim >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("GaussianMixture: sigma must be > 0");
  if (static_cast<int>(means.size()) != num_classes) {
    throw std::invalid_argument("GaussianMixture: one mean per class required");
  }
  if (prior.num_classes() != num_classes) {
    throw std::invalid_argument("GaussianMixture: prior dimension mismatch");
  }
  for (const auto& m : means) {
    if (static_cast<int>(m.size()) != dim) {
      throw std::invalid_argument("GaussianMixture: mean dimension mismatch");
    }
  }
  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) {
      if (means[a] == means[b]) {
        throw std::invalid_argument("GaussianMixture: means must be pairwise distinct");
      }
    }
  }
}

GaussianMixture make_mixture(int num_classes, int dim, double separation, double sigma,
                             LabelDistribution prior) {
  GaussianMixture mix;
  mix.num_classes = num_classes;
  mix.dim = dim;
  mix.sigma = sigma;
  mix.prior = std::move(prior);
  mix.means.assign(num_classes, Vector(dim, 0.0));
  for (int c = 0; c < num_classes; ++c) {
    if (dim == 1) {
      mix.means[c][0] = separation * c;
    } else {
      const double angle = 2.0 * std::numbers::pi * c / num_classes;
      mix.means[c][0] = separation * std::cos(angle);
      mix.means[c][1] = separation * std::sin(angle);
    }
  }
  mix.validate();
  return mix;
}

double gaussian_log_likelihood(const GaussianMixture& mix, const double* x, int y) {
  double sq = 0.0;
  const Vector& mu = mix.means[y];
  for (int d = 0; d < mix.dim; ++d) {
    const double diff = x[d] - mu[d];
    sq += diff * diff;
  }
  const double log_norm =
      -0.5 * mix.dim * std::log(2.0 * std::numbers::pi * mix.sigma * mix.sigma);
  return log_norm - 0.5 * sq / (mix.sigma * mix.sigma);
}

void bayes_log_joint(const GaussianMixture& mix, const double* x,
                     const LabelDistribution& prior, double* out) {
  for (int y = 0; y < mix.num_classes; ++y) {
    out[y] = gaussian_log_likelihood(mix, x, y) + std::log(prior[y]);
  }
}

LabelDistribution bayes_posterior(const GaussianMixture& mix, const double* x,
                                  const std::optional<LabelDistribution>& prior_override) {
  const LabelDistribution& prior = prior_override ? *prior_override : mix.prior;
  if (prior.num_classes() != mix.num_classes) {
    throw std::invalid_argument("bayes_posterior: prior dimension mismatch");
  }
  Vector logj(mix.num_classes);
  bayes_log_joint(mix, x, prior, logj.data());
  Vector post(mix.num_classes);
  kernels::softmax_row(logj.data(), mix.num_classes, post.data());
  // Guard against underflow to an exact zero in extremely separated regions;
  // the LabelDistribution invariant requires finite logs.
  bool fold = false;
  for (double& v : post) {
    if (v < 1e-300) {
      v = 1e-300;
      fold = true;
    }
  }
  if (fold) {
    double s = 0.0;
    for (double v : post) s += v;
    for (double& v : post) v /= s;
  }
  double s2 = 0.0;
  for (double v : post) s2 += v;
  post[argmax_lowest(post.data(), mix.num_classes)] += 1.0 - s2;
  return LabelDistribution(std::move(post));
}

int bayes_balanced_classifier(const GaussianMixture& mix, const double* x) {
  Vector ll(mix.num_classes);
  for (int y = 0; y < mix.num_classes; ++y) ll[y] = gaussian_log_likelihood(mix, x, y);
  return argmax_lowest(ll.data(), mix.num_classes);
}

}  // namespace balpoe
