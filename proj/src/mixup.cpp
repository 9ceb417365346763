#include "balpoe/mixup.hpp"

#include <stdexcept>

namespace balpoe {

double beta_sample(double alpha, SplitMix64& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("beta_sample: alpha must be > 0");
  const double g1 = rng.next_gamma(alpha);
  const double g2 = rng.next_gamma(alpha);
  return g1 / (g1 + g2);
}

MixedBatch mix_batch(const Matrix& features, const std::vector<int>& labels,
                     int num_classes, const MixupConfig& cfg, SplitMix64& rng) {
  const int B = features.rows;
  const int d = features.cols;
  if (B < 1) throw std::invalid_argument("mix_batch: empty batch");
  if (static_cast<int>(labels.size()) != B) {
    throw std::invalid_argument("mix_batch: label count mismatch");
  }

  MixedBatch out;
  out.features = Matrix(B, d);
  out.soft_labels = Matrix(B, num_classes, 0.0);
  out.xi.assign(B, 1.0);
  out.src_a.resize(B);
  out.src_b.resize(B);

  if (!cfg.enabled) {
    out.features = features;
    for (int i = 0; i < B; ++i) {
      out.soft_labels.at(i, labels[i]) = 1.0;
      out.src_a[i] = i;
      out.src_b[i] = i;
    }
    return out;
  }

  const std::vector<int> perm = random_permutation(B, rng);
  for (int i = 0; i < B; ++i) {
    const int j = perm[i];
    const double xi = beta_sample(cfg.alpha, rng);
    out.xi[i] = xi;
    out.src_a[i] = i;
    out.src_b[i] = j;
    const double* xa = features.row(i);
    const double* xb = features.row(j);
    double* xm = out.features.row(i);
    for (int k = 0; k < d; ++k) xm[k] = xi * xa[k] + (1.0 - xi) * xb[k];
    out.soft_labels.at(i, labels[i]) += xi;
    out.soft_labels.at(i, labels[j]) += 1.0 - xi;
  }
  return out;
}

}  // namespace balpoe
