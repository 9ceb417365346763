#include "balpoe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "balpoe/kernels.hpp"
#include "balpoe/rng.hpp"

namespace balpoe {

long long ReliabilityBins::total() const {
  long long n = 0;
  for (long long c : counts) n += c;
  return n;
}

double balanced_error(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int num_classes) {
  if (labels.empty() || predictions.size() != labels.size()) {
    throw std::invalid_argument("balanced_error: empty or mismatched inputs");
  }
  std::vector<long long> total(num_classes, 0), wrong(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes) throw std::invalid_argument("balanced_error: label out of range");
    ++total[y];
    if (predictions[i] != y) ++wrong[y];
  }
  double sum = 0.0;
  int present = 0;
  for (int y = 0; y < num_classes; ++y) {
    if (total[y] == 0) continue;  // absent classes are excluded from the mean
    sum += static_cast<double>(wrong[y]) / total[y];
    ++present;
  }
  if (present == 0) throw std::invalid_argument("balanced_error: no labeled classes");
  return sum / present;
}

namespace {
int bin_index(double conf, int M) {
  // Intervals ((m-1)/M, m/M]; confidences <= 0 land in the first bin.
  int idx = static_cast<int>(std::ceil(conf * M)) - 1;
  return std::clamp(idx, 0, M - 1);
}
}  // namespace

ReliabilityBins reliability(const Vector& confidences, const std::vector<bool>& correct,
                            int M) {
  if (M < 1) throw std::invalid_argument("reliability: M must be >= 1");
  if (confidences.size() != correct.size()) {
    throw std::invalid_argument("reliability: confidences/correct size mismatch");
  }
  ReliabilityBins bins;
  bins.M = M;
  bins.counts.assign(M, 0);
  bins.accuracy.assign(M, 0.0);
  bins.confidence.assign(M, 0.0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("reliability: confidence outside [0, 1]");
    }
    const int m = bin_index(c, M);
    ++bins.counts[m];
    bins.confidence[m] += c;
    if (correct[i]) bins.accuracy[m] += 1.0;
  }
  for (int m = 0; m < M; ++m) {
    if (bins.counts[m] > 0) {
      bins.accuracy[m] /= bins.counts[m];
      bins.confidence[m] /= bins.counts[m];
    }
  }
  return bins;
}

double ece_from_bins(const ReliabilityBins& bins) {
  const long long n = bins.total();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (int m = 0; m < bins.M; ++m) {
    if (bins.counts[m] == 0) continue;
    sum += static_cast<double>(bins.counts[m]) / n *
           std::abs(bins.accuracy[m] - bins.confidence[m]);
  }
  return sum;
}

double mce_from_bins(const ReliabilityBins& bins) {
  double worst = 0.0;
  for (int m = 0; m < bins.M; ++m) {
    if (bins.counts[m] == 0) continue;
    worst = std::max(worst, std::abs(bins.accuracy[m] - bins.confidence[m]));
  }
  return worst;
}

double ece(const Vector& confidences, const std::vector<bool>& correct, int M) {
  return ece_from_bins(reliability(confidences, correct, M));
}

double mce(const Vector& confidences, const std::vector<bool>& correct, int M) {
  return mce_from_bins(reliability(confidences, correct, M));
}

LabelDistribution expected_marginal(const Matrix& posteriors) {
  if (posteriors.rows == 0 || posteriors.cols == 0) {
    throw std::invalid_argument("expected_marginal: empty input");
  }
  const int C = posteriors.cols;
  Vector mean(C, 0.0);
  for (int i = 0; i < posteriors.rows; ++i) {
    const double* row = posteriors.row(i);
    for (int y = 0; y < C; ++y) mean[y] += row[y];
  }
  for (double& v : mean) v = std::max(v / posteriors.rows, 1e-300);
  double sum = 0.0;
  for (double v : mean) sum += v;
  for (double& v : mean) v /= sum;
  double s2 = 0.0;
  for (double v : mean) s2 += v;
  mean[argmax_lowest(mean.data(), C)] += 1.0 - s2;
  return LabelDistribution(std::move(mean));
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size() || p.empty()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  double kl = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] == 0.0) continue;  // 0 log 0 = 0
    if (!(q[y] > 0.0)) {
      throw std::invalid_argument("kl_divergence: q has no mass where p does");
    }
    kl += p[y] * std::log(p[y] / q[y]);
  }
  return kl;
}

namespace {
double accuracy_of(const std::vector<int>& pred, const std::vector<int>& labels) {
  long long correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == labels[i]) ++correct;
  }
  return labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();
}

std::optional<double> group_accuracy(const std::vector<int>& group,
                                     const std::vector<int>& pred,
                                     const std::vector<int>& labels) {
  if (group.empty()) return std::nullopt;
  long long correct = 0, total = 0;
  int max_class = 0;
  for (int c : group) max_class = std::max(max_class, c);
  std::vector<char> member(max_class + 1, 0);
  for (int c : group) member[c] = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y <= max_class && member[y]) {
      ++total;
      if (pred[i] == y) ++correct;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / total;
}
}  // namespace

EvalReport evaluate(const ExpertScorer& scorer, const Dataset& test, const EvalOptions& opts) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  const int C = scorer.num_classes();
  EvalReport report;

  // Balanced-test pass: per-expert logits once, everything else derived.
  const std::vector<Matrix> expert_logits = scorer.score(test.features);
  Matrix combined(test.size(), C, 0.0);
  for (const auto& m : expert_logits) {
    for (std::size_t k = 0; k < combined.data.size(); ++k) combined.data[k] += m.data[k];
  }
  for (double& v : combined.data) v /= expert_logits.size();

  Matrix probs;
  kernels::row_softmax(combined, probs);

  std::vector<int> pred(test.size());
  Vector conf(test.size());
  std::vector<bool> correct(test.size());
  for (int i = 0; i < test.size(); ++i) {
    const double* p = probs.row(i);
    pred[i] = argmax_lowest(p, C);
    conf[i] = p[pred[i]];
    correct[i] = pred[i] == test.labels[i];
  }

  report.overall_accuracy = accuracy_of(pred, test.labels);
  report.balanced_err = balanced_error(pred, test.labels, C);

  if (!opts.train_counts.empty()) {
    const GroupPartition groups = group_partition(opts.train_counts);
    report.many_accuracy = group_accuracy(groups.many, pred, test.labels);
    report.medium_accuracy = group_accuracy(groups.medium, pred, test.labels);
    report.few_accuracy = group_accuracy(groups.few, pred, test.labels);
  }

  report.bins = reliability(conf, correct, opts.bins);
  report.ece_value = ece_from_bins(report.bins);
  report.mce_value = mce_from_bins(report.bins);

  const LabelDistribution marginal = expected_marginal(probs);
  report.marginal = marginal.probs;
  report.kl_ensemble = kl_divergence(scorer.native_prior().probs, marginal.probs);

  const LabelDistribution p_train = scorer.train_prior();
  for (int e = 0; e < scorer.spec().num_experts(); ++e) {
    Matrix ep;
    kernels::row_softmax(expert_logits[e], ep);
    ExpertKl item;
    item.target_prior = lambda_prior(p_train, scorer.spec().experts[e]).probs;
    item.expected_marginal = expected_marginal(ep).probs;
    item.kl = kl_divergence(item.target_prior, item.expected_marginal);
    report.expert_kl.push_back(std::move(item));
  }

  // Shifted-distribution protocol: forward and backward exponential
  // profiles at each requested imbalance ratio, resampled from the test
  // set without replacement.
  std::uint64_t shift_index = 0;
  for (double ir : opts.shifted_imbalance_ratios) {
    for (int direction = 0; direction < 2; ++direction) {
      const bool fwd = direction == 0;
      const LabelDistribution fwd_target = lt_exponential_prior(C, ir);
      const LabelDistribution target = fwd ? fwd_target : reversed(fwd_target);
      const Dataset shifted =
          resample_shifted(test, target, SplitMix64::derive(opts.seed, 0xe0 + shift_index));
      ++shift_index;

      ShiftedEval entry;
      entry.kind = fwd ? "forward" : "backward";
      entry.imbalance_ratio = ir;
      entry.size = shifted.size();
      entry.target = target.probs;
      entry.accuracy = accuracy_of(predict(scorer, shifted.features), shifted.labels);
      if (opts.known_prior) {
        entry.adjusted_accuracy =
            accuracy_of(predict(scorer, shifted.features, target), shifted.labels);
      }
      report.shifted.push_back(std::move(entry));
    }
  }
  return report;
}

}  // namespace balpoe
