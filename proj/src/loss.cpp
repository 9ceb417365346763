#include "balpoe/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "balpoe/kernels.hpp"

namespace balpoe {

namespace {
void check_sizes(const Vector& logits, const Vector& target) {
  if (logits.empty() || logits.size() != target.size()) {
    throw std::invalid_argument("loss: logits/target dimension mismatch");
  }
}

Vector adjusted(const Vector& logits, const Vector& tau, const Vector& log_prior) {
  if (tau.size() != logits.size() || log_prior.size() != logits.size()) {
    throw std::invalid_argument("loss: tau/log_prior dimension mismatch");
  }
  Vector a(logits.size());
  for (std::size_t y = 0; y < logits.size(); ++y) a[y] = logits[y] + tau[y] * log_prior[y];
  return a;
}
}  // namespace

double ce_loss(const Vector& logits, const Vector& target) {
  check_sizes(logits, target);
  const int C = static_cast<int>(logits.size());
  const double lse = kernels::log_sum_exp(logits.data(), C);
  double loss = 0.0;
  for (int y = 0; y < C; ++y) {
    if (target[y] != 0.0) loss -= target[y] * (logits[y] - lse);
  }
  return loss;
}

Vector ce_grad(const Vector& logits, const Vector& target) {
  check_sizes(logits, target);
  const int C = static_cast<int>(logits.size());
  Vector g(C);
  kernels::softmax_row(logits.data(), C, g.data());
  for (int y = 0; y < C; ++y) g[y] -= target[y];
  return g;
}

double gla_loss(const Vector& logits, const Vector& target, const Vector& tau,
                const Vector& log_prior) {
  return ce_loss(adjusted(logits, tau, log_prior), target);
}

double gla_loss_margin(const Vector& logits, const Vector& target, const Vector& tau,
                       const Vector& log_prior) {
  check_sizes(logits, target);
  const int C = static_cast<int>(logits.size());
  double loss = 0.0;
  Vector exps(C);
  for (int y = 0; y < C; ++y) {
    if (target[y] == 0.0) continue;
    // log(1 + sum_{j != y} exp(f_j - f_y + delta_yj)) evaluated as
    // logsumexp over {0} u {exponents} for stability at large margins.
    int n = 0;
    exps[n++] = 0.0;
    for (int j = 0; j < C; ++j) {
      if (j == y) continue;
      exps[n++] = logits[j] - logits[y] + tau[j] * log_prior[j] - tau[y] * log_prior[y];
    }
    loss += target[y] * kernels::log_sum_exp(exps.data(), n);
  }
  return loss;
}

Vector gla_grad(const Vector& logits, const Vector& target, const Vector& tau,
                const Vector& log_prior) {
  return ce_grad(adjusted(logits, tau, log_prior), target);
}

double total_loss(const std::vector<Vector>& per_expert_logits, const Vector& target,
                  const EnsembleSpec& ensemble, const Vector& log_prior) {
  if (static_cast<int>(per_expert_logits.size()) != ensemble.num_experts()) {
    throw std::invalid_argument("total_loss: logits list does not match expert count");
  }
  double sum = 0.0;
  for (int e = 0; e < ensemble.num_experts(); ++e) {
    sum += gla_loss(per_expert_logits[e], target, ensemble.experts[e].tau(), log_prior);
  }
  return sum / ensemble.num_experts();
}

}  // namespace balpoe
