#pragma once

#include "balpoe/core.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

/// Softmax cross-entropy -sum_y target[y] * log softmax(logits)[y] with
/// log-sum-exp stabilization. Accepts soft targets; zero-weight classes
/// contribute nothing, so a two-point mixup target reduces to the weighted
/// two-term sum.
double ce_loss(const Vector& logits, const Vector& target);

/// Gradient of ce_loss w.r.t. the logits: softmax(logits) - target.
Vector ce_grad(const Vector& logits, const Vector& target);

/// Generalized logit-adjusted loss: cross-entropy of the adjusted scorer
/// logits + tau * log_prior (componentwise).
double gla_loss(const Vector& logits, const Vector& target, const Vector& tau,
                const Vector& log_prior);

/// The same loss through the pairwise-margin route:
/// sum_y target[y] * log(1 + sum_{j != y} exp(f_j - f_y + delta[y][j]))
/// with delta[y][j] = tau_j log p_j - tau_y log p_y. Kept as an independent
/// algebraic path; it must agree with gla_loss to 1e-10.
double gla_loss_margin(const Vector& logits, const Vector& target, const Vector& tau,
                       const Vector& log_prior);

/// Gradient of gla_loss w.r.t. the logits: softmax(adjusted) - target.
Vector gla_grad(const Vector& logits, const Vector& target, const Vector& tau,
                const Vector& log_prior);

/// Mean of per-expert gLA losses with tau = 1 - lambda (one entry of
/// per_expert_logits per expert in spec order).
double total_loss(const std::vector<Vector>& per_expert_logits, const Vector& target,
                  const EnsembleSpec& ensemble, const Vector& log_prior);

}  // namespace balpoe
