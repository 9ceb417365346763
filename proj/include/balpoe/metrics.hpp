#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "balpoe/dataset.hpp"
#include "balpoe/ensemble.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

/// M equal-width confidence intervals over (0, 1]. acc and conf are within-
/// bin means (0 for empty bins).
struct ReliabilityBins {
  int M = 0;
  std::vector<long long> counts;
  Vector accuracy;
  Vector confidence;

  long long total() const;
};

/// Mean over present classes of the per-class error rate. Classes without
/// any labels are excluded from the mean.
double balanced_error(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int num_classes);

ReliabilityBins reliability(const Vector& confidences, const std::vector<bool>& correct,
                            int M);

double ece(const Vector& confidences, const std::vector<bool>& correct, int M);
double mce(const Vector& confidences, const std::vector<bool>& correct, int M);

/// ECE/MCE recomputed from prebuilt bins (bit-identical to the direct path).
double ece_from_bins(const ReliabilityBins& bins);
double mce_from_bins(const ReliabilityBins& bins);

/// Columnwise mean of a row-stochastic matrix. Exact zeros are clamped to
/// 1e-300 so the distribution invariant (finite logs) holds.
LabelDistribution expected_marginal(const Matrix& posteriors);

/// sum_y p[y] log(p[y]/q[y]) with 0 log 0 = 0; throws if q[y] == 0 where
/// p[y] > 0.
double kl_divergence(const Vector& p, const Vector& q);

struct ShiftedEval {
  std::string kind;  // "forward" or "backward"
  double imbalance_ratio = 1.0;
  long long size = 0;
  Vector target;
  double accuracy = 0.0;
  std::optional<double> adjusted_accuracy;
};

struct ExpertKl {
  Vector target_prior;      // P^lambda of the expert
  Vector expected_marginal; // mean softmax of the expert over the test set
  double kl = 0.0;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  double balanced_err = 0.0;
  std::optional<double> many_accuracy;
  std::optional<double> medium_accuracy;
  std::optional<double> few_accuracy;
  double ece_value = 0.0;
  double mce_value = 0.0;
  ReliabilityBins bins;
  Vector marginal;          // ensemble expected marginal
  double kl_ensemble = 0.0; // KL(P^lambda_bar || marginal)
  std::vector<ExpertKl> expert_kl;
  std::vector<ShiftedEval> shifted;
};

struct EvalOptions {
  std::vector<double> shifted_imbalance_ratios;
  bool known_prior = true;  // also report posthoc-adjusted accuracy
  int bins = 15;
  std::uint64_t seed = 0;
  std::vector<long long> train_counts;  // defines many/medium/few groups
};

/// Full protocol: balanced-test metrics (accuracy, BER, group accuracies,
/// calibration, marginal/KL diagnostics) plus accuracy on forward and
/// backward resampled shifted sets, with and without posthoc adjustment to
/// the known target prior.
EvalReport evaluate(const ExpertScorer& scorer, const Dataset& test, const EvalOptions& opts);

}  // namespace balpoe
