#include "balpoe/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace balpoe {

namespace {
void validate_distribution(const Vector& p) {
  if (p.empty()) throw std::invalid_argument("LabelDistribution: empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("LabelDistribution: entries must be positive and finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("LabelDistribution: probabilities must sum to 1");
  }
}

LabelDistribution normalize_weights(Vector w) {
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  // Rounding can leave the sum a few ulps off 1; fold the residue into the
  // largest entry so the 1e-12 invariant holds exactly.
  double s2 = std::accumulate(w.begin(), w.end(), 0.0);
  auto it = std::max_element(w.begin(), w.end());
  *it += 1.0 - s2;
  return LabelDistribution(std::move(w));
}
}  // namespace

LabelDistribution::LabelDistribution(Vector p) : probs(std::move(p)) {
  validate_distribution(probs);
}

Vector LabelDistribution::log() const {
  Vector out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = std::log(probs[i]);
  return out;
}

LambdaVector::LambdaVector(Vector v) : lambda(std::move(v)) {
  if (lambda.empty()) throw std::invalid_argument("LambdaVector: empty");
  for (double x : lambda) {
    if (!std::isfinite(x)) throw std::invalid_argument("LambdaVector: entries must be finite");
  }
}

LambdaVector::LambdaVector(double scalar, int C) : LambdaVector(Vector(C, scalar)) {}

Vector LambdaVector::tau() const {
  Vector t(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) t[i] = 1.0 - lambda[i];
  return t;
}

LabelDistribution uniform_prior(int C) {
  if (C < 1) throw std::invalid_argument("uniform_prior: C must be >= 1");
  return LabelDistribution(Vector(C, 1.0 / C));
}

LabelDistribution lt_exponential_prior(int C, double rho) {
  if (C < 1) throw std::invalid_argument("lt_exponential_prior: C must be >= 1");
  if (!(rho >= 1.0)) throw std::invalid_argument("lt_exponential_prior: rho must be >= 1");
  if (C == 1) return LabelDistribution(Vector{1.0});
  Vector w(C);
  const double log_rho = std::log(rho);
  for (int i = 0; i < C; ++i) {
    w[i] = std::exp(-log_rho * static_cast<double>(i) / (C - 1));
  }
  return normalize_weights(std::move(w));
}

LabelDistribution pareto_prior(int C, double alpha) {
  if (C < 1) throw std::invalid_argument("pareto_prior: C must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("pareto_prior: alpha must be > 0");
  Vector w(C);
  for (int i = 0; i < C; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -1.0 / alpha);
  }
  return normalize_weights(std::move(w));
}

LabelDistribution empirical_prior(const std::vector<long long>& counts) {
  if (counts.empty()) throw std::invalid_argument("empirical_prior: empty counts");
  Vector w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw std::invalid_argument("empirical_prior: negative count");
    w[i] = static_cast<double>(counts[i]) + 1e-12;
  }
  return normalize_weights(std::move(w));
}

LabelDistribution lambda_prior(const LabelDistribution& p_train, const LambdaVector& lam) {
  const int C = p_train.num_classes();
  if (lam.num_classes() != C) {
    throw std::invalid_argument("lambda_prior: dimension mismatch");
  }
  Vector logw(C);
  const Vector logp = p_train.log();
  for (int y = 0; y < C; ++y) {
    logw[y] = lam.lambda[y] * logp[y];
    if (!std::isfinite(logw[y])) {
      throw numeric_error("lambda_prior: lambda * log(p) out of range");
    }
  }
  const double m = *std::max_element(logw.begin(), logw.end());
  Vector w(C);
  for (int y = 0; y < C; ++y) {
    w[y] = std::exp(logw[y] - m);
    if (!std::isfinite(w[y]) || w[y] == 0.0) {
      throw numeric_error("lambda_prior: lambda * log(p) exceeds representable range");
    }
  }
  return normalize_weights(std::move(w));
}

Matrix margin_matrix(const LabelDistribution& p_train, const Vector& tau) {
  const int C = p_train.num_classes();
  if (static_cast<int>(tau.size()) != C) {
    throw std::invalid_argument("margin_matrix: dimension mismatch");
  }
  const Vector logp = p_train.log();
  Matrix delta(C, C, 0.0);
  for (int y = 0; y < C; ++y) {
    for (int j = 0; j < C; ++j) {
      delta.at(y, j) = tau[j] * logp[j] - tau[y] * logp[y];
    }
  }
  return delta;
}

Vector target_lambda_bar(const LabelDistribution& p_train, const LabelDistribution& p_test) {
  const int C = p_train.num_classes();
  if (p_test.num_classes() != C) {
    throw std::invalid_argument("target_lambda_bar: dimension mismatch");
  }
  Vector out(C);
  for (int y = 0; y < C; ++y) out[y] = std::log(p_test[y] / p_train[y]);
  return out;
}

EnsembleSpec make_ensemble_spec(const std::vector<LambdaVector>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("make_ensemble_spec: empty lambda list");
  const int C = lambdas.front().num_classes();
  for (const auto& l : lambdas) {
    if (l.num_classes() != C) {
      throw std::invalid_argument("make_ensemble_spec: inconsistent dimensions");
    }
  }
  EnsembleSpec spec;
  spec.experts = lambdas;
  spec.lambda_bar.assign(C, 0.0);
  for (const auto& l : lambdas) {
    for (int y = 0; y < C; ++y) spec.lambda_bar[y] += l.lambda[y];
  }
  for (int y = 0; y < C; ++y) spec.lambda_bar[y] /= lambdas.size();
  return spec;
}

LabelDistribution reversed(const LabelDistribution& p) {
  Vector r(p.probs.rbegin(), p.probs.rend());
  return LabelDistribution(std::move(r));
}

}  // namespace balpoe
