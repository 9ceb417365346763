#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balpoe/core.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

enum class Activation { kRelu, kTanh };
enum class HeadKind { kLinear, kCosine };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);
HeadKind head_kind_from_string(const std::string& s);
std::string to_string(HeadKind k);

/// One scoring head h -> C. Cosine heads score
/// kappa * w_y.z / (||w_y|| ||z||) and carry no bias.
struct Head {
  HeadKind kind = HeadKind::kLinear;
  Matrix W;  // C x feature_dim
  Vector b;  // C, all zero and unused for cosine
  double kappa = 32.0;
};

/// Shared trunk (depth 0: identity; depth 1: affine d -> h plus an
/// elementwise nonlinearity) with one head per expert.
struct Model {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  int depth = 1;  // 0 or 1
  Activation activation = Activation::kRelu;
  Matrix trunk_W;  // h x d (depth 1 only)
  Vector trunk_b;  // h
  std::vector<Head> heads;

  int feature_dim() const { return depth == 0 ? input_dim : hidden_dim; }
  int num_experts() const { return static_cast<int>(heads.size()); }

  /// Flat list of all parameter scalars, fixed order: trunk W, trunk b,
  /// then per head W (and b for linear heads).
  std::vector<double*> param_ptrs();
  std::size_t num_params() const;
};

/// Gradient buffers matching Model's parameters, same flat order.
struct ModelGrads {
  Matrix trunk_W;
  Vector trunk_b;
  std::vector<Matrix> head_W;
  std::vector<Vector> head_b;
  std::vector<HeadKind> head_kinds;  // cosine heads have no bias parameter

  void zero();
  std::vector<double*> param_ptrs();
};

struct ModelConfig {
  int input_dim = 0;
  int hidden_dim = 16;
  int num_classes = 0;
  int depth = 1;
  Activation activation = Activation::kRelu;
  HeadKind head = HeadKind::kLinear;
  double kappa = 32.0;
  int num_experts = 1;
};

/// Symmetric uniform fan-in initialization, deterministic for a seed.
Model init_model(const ModelConfig& cfg, std::uint64_t seed);

ModelGrads make_grads(const Model& model);

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  Matrix hidden_pre;           // B x h (depth 1 only)
  Matrix hidden;               // B x feature_dim
  std::vector<Matrix> logits;  // per-expert B x C
};

/// Deterministic batched forward; throws numeric_error on non-finite
/// parameters or outputs.
void forward(const Model& model, const Matrix& X, ForwardCache& cache);
std::vector<Matrix> forward(const Model& model, const Matrix& X);

/// Accumulates parameter gradients for d(loss)/d(logits) in `dLogits`
/// (one B x C matrix per expert). The batch reduction order is fixed, so
/// results are independent of thread count.
void backward(const Model& model, const Matrix& X, const ForwardCache& cache,
              const std::vector<Matrix>& dLogits, ModelGrads& grads);

/// Total-loss value and parameter gradients for one (possibly soft-labeled)
/// batch: mean over experts of the gLA loss, mean over the batch.
double training_loss_and_grads(const Model& model, const Matrix& X,
                               const Matrix& soft_targets, const EnsembleSpec& ensemble,
                               const Vector& log_prior, ModelGrads& grads);

}  // namespace balpoe
