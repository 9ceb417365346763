#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "balpoe/core.hpp"
#include "balpoe/mixture.hpp"
#include "balpoe/model.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

/// Log-space average of the expert scorers: the Balanced Product of
/// Experts. Softmax of the result is the ensemble posterior.
Vector combine(const std::vector<Vector>& per_expert_logits);

/// Swaps the prior a scorer is biased toward:
/// out[y] = logits[y] + log p_to[y] - log p_from[y].
Vector posthoc_adjust(const Vector& logits, const LabelDistribution& p_from,
                      const LabelDistribution& p_to);

/// An exactly calibrated lambda-expert built from the generating mixture:
/// its training scorer is s_y(x) = log P_train(y|x), and the target scorer
/// applies f_y = s_y + (lambda_y - 1) log P_train(y).
struct OracleScorer {
  const GaussianMixture* mixture = nullptr;
  LambdaVector lambda;
};

Vector oracle_expert_logits(const OracleScorer& scorer, const double* x);

/// Numerical Theorem-1 check: max componentwise deviation between
/// softmax(combine(oracle expert logits)) and the posterior under the
/// P^lambda_bar prior, over the given points.
double verify_theorem1(const GaussianMixture& mixture, const std::vector<LambdaVector>& lambdas,
                       const Matrix& points);

/// Anything that scores a batch with one logit row per expert. Implemented
/// by trained models and by oracle ensembles.
class ExpertScorer {
 public:
  virtual ~ExpertScorer() = default;
  virtual int num_classes() const = 0;
  virtual const EnsembleSpec& spec() const = 0;
  /// Per-expert logits for a feature batch, in spec order.
  virtual std::vector<Matrix> score(const Matrix& X) const = 0;
  /// The prior the combined scorer is calibrated toward (P^lambda_bar for
  /// gLA-trained and oracle ensembles).
  virtual LabelDistribution native_prior() const = 0;
  /// The training label distribution the lambda parameterization is
  /// anchored to.
  virtual LabelDistribution train_prior() const = 0;
};

class ModelScorer : public ExpertScorer {
 public:
  ModelScorer(const Model* model, EnsembleSpec spec, LabelDistribution train_prior);
  int num_classes() const override;
  const EnsembleSpec& spec() const override;
  std::vector<Matrix> score(const Matrix& X) const override;
  LabelDistribution native_prior() const override;
  LabelDistribution train_prior() const override;

 private:
  const Model* model_;
  EnsembleSpec spec_;
  LabelDistribution train_prior_;
};

class OracleEnsembleScorer : public ExpertScorer {
 public:
  OracleEnsembleScorer(const GaussianMixture* mixture, EnsembleSpec spec);
  int num_classes() const override;
  const EnsembleSpec& spec() const override;
  std::vector<Matrix> score(const Matrix& X) const override;
  LabelDistribution native_prior() const override;
  LabelDistribution train_prior() const override;

 private:
  const GaussianMixture* mixture_;
  EnsembleSpec spec_;
};

/// Combined logits for a batch (mean over experts), optionally posthoc
/// adjusted from the scorer's native prior to `p_test`.
Matrix combined_logits(const ExpertScorer& scorer, const Matrix& X,
                       const std::optional<LabelDistribution>& p_test = {});

/// argmax predictions of the (optionally adjusted) combined logits; ties
/// break toward the lowest class index.
std::vector<int> predict(const ExpertScorer& scorer, const Matrix& X,
                         const std::optional<LabelDistribution>& p_test = {});

}  // namespace balpoe
