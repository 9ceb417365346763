#include "balpoe/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "balpoe/kernels.hpp"

namespace balpoe {

Vector combine(const std::vector<Vector>& per_expert_logits) {
  if (per_expert_logits.empty()) throw std::invalid_argument("combine: empty expert list");
  const std::size_t C = per_expert_logits.front().size();
  for (const auto& v : per_expert_logits) {
    if (v.size() != C) throw std::invalid_argument("combine: dimension mismatch");
  }
  Vector out(C, 0.0);
  for (const auto& v : per_expert_logits) {
    for (std::size_t y = 0; y < C; ++y) out[y] += v[y];
  }
  const double inv = 1.0 / per_expert_logits.size();
  for (double& v : out) v *= inv;
  return out;
}

Vector posthoc_adjust(const Vector& logits, const LabelDistribution& p_from,
                      const LabelDistribution& p_to) {
  const int C = static_cast<int>(logits.size());
  if (p_from.num_classes() != C || p_to.num_classes() != C) {
    throw std::invalid_argument("posthoc_adjust: dimension mismatch");
  }
  Vector out(C);
  for (int y = 0; y < C; ++y) {
    out[y] = logits[y] + std::log(p_to[y]) - std::log(p_from[y]);
  }
  return out;
}

Vector oracle_expert_logits(const OracleScorer& scorer, const double* x) {
  const GaussianMixture& mix = *scorer.mixture;
  const int C = mix.num_classes;
  if (scorer.lambda.num_classes() != C) {
    throw std::invalid_argument("oracle_expert_logits: lambda dimension mismatch");
  }
  const LabelDistribution post = bayes_posterior(mix, x);
  Vector f(C);
  for (int y = 0; y < C; ++y) {
    f[y] = std::log(post[y]) + (scorer.lambda.lambda[y] - 1.0) * std::log(mix.prior[y]);
  }
  return f;
}

double verify_theorem1(const GaussianMixture& mixture, const std::vector<LambdaVector>& lambdas,
                       const Matrix& points) {
  if (lambdas.empty() || points.rows == 0) {
    throw std::invalid_argument("verify_theorem1: need lambdas and points");
  }
  const EnsembleSpec spec = make_ensemble_spec(lambdas);
  const LabelDistribution target = lambda_prior(mixture.prior, LambdaVector(spec.lambda_bar));
  const int C = mixture.num_classes;

  Vector deviations(points.rows, 0.0);
  kernels::parallel_for(points.rows, [&](int i) {
    const double* x = points.row(i);
    std::vector<Vector> expert_logits;
    expert_logits.reserve(lambdas.size());
    for (const auto& lam : lambdas) {
      expert_logits.push_back(oracle_expert_logits({&mixture, lam}, x));
    }
    const Vector mean = combine(expert_logits);
    Vector ensemble_post(C);
    kernels::softmax_row(mean.data(), C, ensemble_post.data());
    const LabelDistribution ref = bayes_posterior(mixture, x, target);
    double dev = 0.0;
    for (int y = 0; y < C; ++y) dev = std::max(dev, std::abs(ensemble_post[y] - ref[y]));
    deviations[i] = dev;
  });
  return *std::max_element(deviations.begin(), deviations.end());
}

ModelScorer::ModelScorer(const Model* model, EnsembleSpec spec, LabelDistribution train_prior)
    : model_(model), spec_(std::move(spec)), train_prior_(std::move(train_prior)) {
  if (model_->num_experts() != spec_.num_experts()) {
    throw std::invalid_argument("ModelScorer: heads do not match ensemble spec");
  }
}

int ModelScorer::num_classes() const { return model_->num_classes; }
const EnsembleSpec& ModelScorer::spec() const { return spec_; }

std::vector<Matrix> ModelScorer::score(const Matrix& X) const {
  return forward(*model_, X);
}

LabelDistribution ModelScorer::native_prior() const {
  return lambda_prior(train_prior_, LambdaVector(spec_.lambda_bar));
}

LabelDistribution ModelScorer::train_prior() const { return train_prior_; }

OracleEnsembleScorer::OracleEnsembleScorer(const GaussianMixture* mixture, EnsembleSpec spec)
    : mixture_(mixture), spec_(std::move(spec)) {
  if (mixture_->num_classes != spec_.num_classes()) {
    throw std::invalid_argument("OracleEnsembleScorer: class count mismatch");
  }
}

int OracleEnsembleScorer::num_classes() const { return mixture_->num_classes; }
const EnsembleSpec& OracleEnsembleScorer::spec() const { return spec_; }

std::vector<Matrix> OracleEnsembleScorer::score(const Matrix& X) const {
  const int B = X.rows;
  const int C = mixture_->num_classes;
  std::vector<Matrix> out(spec_.num_experts());
  for (auto& m : out) m = Matrix(B, C);
  kernels::parallel_for(B, [&](int i) {
    for (int e = 0; e < spec_.num_experts(); ++e) {
      const Vector f = oracle_expert_logits({mixture_, spec_.experts[e]}, X.row(i));
      std::copy(f.begin(), f.end(), out[e].row(i));
    }
  });
  return out;
}

LabelDistribution OracleEnsembleScorer::native_prior() const {
  return lambda_prior(mixture_->prior, LambdaVector(spec_.lambda_bar));
}

LabelDistribution OracleEnsembleScorer::train_prior() const { return mixture_->prior; }

Matrix combined_logits(const ExpertScorer& scorer, const Matrix& X,
                       const std::optional<LabelDistribution>& p_test) {
  const std::vector<Matrix> logits = scorer.score(X);
  const int B = X.rows;
  const int C = scorer.num_classes();
  Matrix out(B, C, 0.0);
  for (const auto& m : logits) {
    for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += m.data[k];
  }
  const double inv = 1.0 / logits.size();
  for (double& v : out.data) v *= inv;

  if (p_test) {
    const LabelDistribution from = scorer.native_prior();
    Vector shift(C);
    for (int y = 0; y < C; ++y) shift[y] = std::log((*p_test)[y]) - std::log(from[y]);
    kernels::parallel_for(B, [&](int i) {
      double* row = out.row(i);
      for (int y = 0; y < C; ++y) row[y] += shift[y];
    });
  }
  return out;
}

std::vector<int> predict(const ExpertScorer& scorer, const Matrix& X,
                         const std::optional<LabelDistribution>& p_test) {
  const Matrix logits = combined_logits(scorer, X, p_test);
  std::vector<int> labels(X.rows);
  kernels::parallel_for(X.rows, [&](int i) {
    labels[i] = argmax_lowest(logits.row(i), logits.cols);
  });
  return labels;
}

}  // namespace balpoe
