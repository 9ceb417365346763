#include "balpoe/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "balpoe/kernels.hpp"
#include "balpoe/rng.hpp"

namespace balpoe {

namespace {
constexpr double kNormEps = 1e-12;

void fill_uniform(Matrix& m, double bound, SplitMix64& rng) {
  for (double& v : m.data) v = bound * (2.0 * rng.next_double() - 1.0);
}

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data) {
    if (!std::isfinite(v)) throw numeric_error(std::string("forward: non-finite ") + what);
  }
}
}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "linear") return HeadKind::kLinear;
  if (s == "cosine") return HeadKind::kCosine;
  throw std::invalid_argument("unknown head kind: " + s);
}

std::string to_string(HeadKind k) {
  return k == HeadKind::kLinear ? "linear" : "cosine";
}

std::vector<double*> Model::param_ptrs() {
  std::vector<double*> out;
  if (depth == 1) {
    for (double& v : trunk_W.data) out.push_back(&v);
    for (double& v : trunk_b) out.push_back(&v);
  }
  for (auto& head : heads) {
    for (double& v : head.W.data) out.push_back(&v);
    if (head.kind == HeadKind::kLinear) {
      for (double& v : head.b) out.push_back(&v);
    }
  }
  return out;
}

std::size_t Model::num_params() const {
  std::size_t n = 0;
  if (depth == 1) n += trunk_W.size() + trunk_b.size();
  for (const auto& head : heads) {
    n += head.W.size();
    if (head.kind == HeadKind::kLinear) n += head.b.size();
  }
  return n;
}

void ModelGrads::zero() {
  trunk_W.fill(0.0);
  std::fill(trunk_b.begin(), trunk_b.end(), 0.0);
  for (auto& w : head_W) w.fill(0.0);
  for (auto& b : head_b) std::fill(b.begin(), b.end(), 0.0);
}

std::vector<double*> ModelGrads::param_ptrs() {
  std::vector<double*> out;
  for (double& v : trunk_W.data) out.push_back(&v);
  for (double& v : trunk_b) out.push_back(&v);
  for (std::size_t e = 0; e < head_W.size(); ++e) {
    for (double& v : head_W[e].data) out.push_back(&v);
    if (head_kinds[e] == HeadKind::kLinear) {
      for (double& v : head_b[e]) out.push_back(&v);
    }
  }
  return out;
}

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.input_dim < 1 || cfg.num_classes < 1 || cfg.num_experts < 1) {
    throw std::invalid_argument("init_model: dimensions must be positive");
  }
  if (cfg.depth != 0 && cfg.depth != 1) {
    throw std::invalid_argument("init_model: depth must be 0 or 1");
  }
  if (cfg.depth == 1 && cfg.hidden_dim < 1) {
    throw std::invalid_argument("init_model: hidden_dim must be positive");
  }
  Model m;
  m.input_dim = cfg.input_dim;
  m.hidden_dim = cfg.depth == 1 ? cfg.hidden_dim : cfg.input_dim;
  m.num_classes = cfg.num_classes;
  m.depth = cfg.depth;
  m.activation = cfg.activation;

  SplitMix64 rng(SplitMix64::derive(seed, 0x6d6f64656cULL));  // model init stream
  if (cfg.depth == 1) {
    m.trunk_W = Matrix(cfg.hidden_dim, cfg.input_dim);
    m.trunk_b.assign(cfg.hidden_dim, 0.0);
    fill_uniform(m.trunk_W, 1.0 / std::sqrt(static_cast<double>(cfg.input_dim)), rng);
  }
  const int fdim = m.feature_dim();
  m.heads.resize(cfg.num_experts);
  for (auto& head : m.heads) {
    head.kind = cfg.head;
    head.kappa = cfg.kappa;
    head.W = Matrix(cfg.num_classes, fdim);
    head.b.assign(cfg.num_classes, 0.0);
    fill_uniform(head.W, 1.0 / std::sqrt(static_cast<double>(fdim)), rng);
  }
  return m;
}

ModelGrads make_grads(const Model& model) {
  ModelGrads g;
  g.trunk_W = Matrix(model.trunk_W.rows, model.trunk_W.cols, 0.0);
  g.trunk_b.assign(model.trunk_b.size(), 0.0);
  g.head_W.reserve(model.heads.size());
  g.head_b.reserve(model.heads.size());
  for (const auto& head : model.heads) {
    g.head_W.emplace_back(head.W.rows, head.W.cols, 0.0);
    g.head_b.emplace_back(head.b.size(), 0.0);
    g.head_kinds.push_back(head.kind);
  }
  return g;
}

namespace {

void cosine_forward(const Head& head, const Matrix& H, Matrix& out) {
  const int B = H.rows, D = H.cols, C = head.W.rows;
  out.rows = B;
  out.cols = C;
  out.data.resize(static_cast<std::size_t>(B) * C);
  Vector w_norms(C);
  for (int y = 0; y < C; ++y) {
    double s = 0.0;
    const double* w = head.W.row(y);
    for (int d = 0; d < D; ++d) s += w[d] * w[d];
    w_norms[y] = std::max(std::sqrt(s), kNormEps);
  }
  kernels::parallel_for(B, [&](int i) {
    const double* z = H.row(i);
    double nz = 0.0;
    for (int d = 0; d < D; ++d) nz += z[d] * z[d];
    nz = std::max(std::sqrt(nz), kNormEps);
    double* o = out.row(i);
    for (int y = 0; y < C; ++y) {
      double dot = 0.0;
      const double* w = head.W.row(y);
      for (int d = 0; d < D; ++d) dot += w[d] * z[d];
      o[y] = head.kappa * dot / (w_norms[y] * nz);
    }
  });
}

// Accumulates cosine-head gradients. dW entries reduce over the batch in
// index order (parallel across classes); dH rows reduce over classes in
// index order (parallel across samples).
void cosine_backward(const Head& head, const Matrix& H, const Matrix& dOut, Matrix& dW,
                     Matrix& dH) {
  const int B = H.rows, D = H.cols, C = head.W.rows;
  Vector w_norms(C);
  for (int y = 0; y < C; ++y) {
    double s = 0.0;
    const double* w = head.W.row(y);
    for (int d = 0; d < D; ++d) s += w[d] * w[d];
    w_norms[y] = std::max(std::sqrt(s), kNormEps);
  }
  Vector z_norms(B);
  kernels::parallel_for(B, [&](int i) {
    const double* z = H.row(i);
    double s = 0.0;
    for (int d = 0; d < D; ++d) s += z[d] * z[d];
    z_norms[i] = std::max(std::sqrt(s), kNormEps);
  });

  kernels::parallel_for(C, [&](int y) {
    const double* w = head.W.row(y);
    double* dw = dW.row(y);
    const double nw = w_norms[y];
    for (int i = 0; i < B; ++i) {
      const double g = dOut.at(i, y);
      if (g == 0.0) continue;
      const double* z = H.row(i);
      const double nz = z_norms[i];
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += w[d] * z[d];
      const double scale = head.kappa / (nw * nz);
      const double proj = dot / (nw * nw);
      for (int d = 0; d < D; ++d) dw[d] += g * scale * (z[d] - proj * w[d]);
    }
  });

  kernels::parallel_for(B, [&](int i) {
    const double* z = H.row(i);
    double* dh = dH.row(i);
    const double nz = z_norms[i];
    for (int y = 0; y < C; ++y) {
      const double g = dOut.at(i, y);
      if (g == 0.0) continue;
      const double* w = head.W.row(y);
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += w[d] * z[d];
      const double scale = head.kappa / (w_norms[y] * nz);
      const double proj = dot / (nz * nz);
      for (int d = 0; d < D; ++d) dh[d] += g * scale * (w[d] - proj * z[d]);
    }
  });
}

void apply_activation(Activation act, const Matrix& pre, Matrix& out) {
  out.rows = pre.rows;
  out.cols = pre.cols;
  out.data.resize(pre.data.size());
  const int n = static_cast<int>(pre.data.size());
  if (act == Activation::kRelu) {
    for (int i = 0; i < n; ++i) out.data[i] = pre.data[i] > 0.0 ? pre.data[i] : 0.0;
  } else {
    for (int i = 0; i < n; ++i) out.data[i] = std::tanh(pre.data[i]);
  }
}

}  // namespace

void forward(const Model& model, const Matrix& X, ForwardCache& cache) {
  if (X.cols != model.input_dim) throw std::invalid_argument("forward: input dim mismatch");
  check_finite(model.trunk_W, "trunk weights");
  for (const auto& h : model.heads) check_finite(h.W, "head weights");

  if (model.depth == 1) {
    kernels::linear_forward(X, model.trunk_W, model.trunk_b, cache.hidden_pre);
    apply_activation(model.activation, cache.hidden_pre, cache.hidden);
  } else {
    cache.hidden = X;
  }

  cache.logits.resize(model.heads.size());
  for (std::size_t e = 0; e < model.heads.size(); ++e) {
    const Head& head = model.heads[e];
    if (head.kind == HeadKind::kLinear) {
      kernels::linear_forward(cache.hidden, head.W, head.b, cache.logits[e]);
    } else {
      cosine_forward(head, cache.hidden, cache.logits[e]);
    }
    check_finite(cache.logits[e], "logits");
  }
}

std::vector<Matrix> forward(const Model& model, const Matrix& X) {
  ForwardCache cache;
  forward(model, X, cache);
  return std::move(cache.logits);
}

void backward(const Model& model, const Matrix& X, const ForwardCache& cache,
              const std::vector<Matrix>& dLogits, ModelGrads& grads) {
  if (dLogits.size() != model.heads.size()) {
    throw std::invalid_argument("backward: one gradient matrix per head required");
  }
  const int B = X.rows;
  Matrix dH(B, model.feature_dim(), 0.0);

  for (std::size_t e = 0; e < model.heads.size(); ++e) {
    const Head& head = model.heads[e];
    if (head.kind == HeadKind::kLinear) {
      kernels::linear_grad_params(dLogits[e], cache.hidden, grads.head_W[e], grads.head_b[e]);
      Matrix dHe;
      kernels::linear_backward_input(dLogits[e], head.W, dHe);
      for (std::size_t k = 0; k < dH.data.size(); ++k) dH.data[k] += dHe.data[k];
    } else {
      cosine_backward(head, cache.hidden, dLogits[e], grads.head_W[e], dH);
    }
  }

  if (model.depth == 1) {
    Matrix dPre(B, model.hidden_dim);
    const int n = static_cast<int>(dPre.data.size());
    if (model.activation == Activation::kRelu) {
      for (int k = 0; k < n; ++k) {
        dPre.data[k] = cache.hidden_pre.data[k] > 0.0 ? dH.data[k] : 0.0;
      }
    } else {
      for (int k = 0; k < n; ++k) {
        const double t = cache.hidden.data[k];
        dPre.data[k] = dH.data[k] * (1.0 - t * t);
      }
    }
    kernels::linear_grad_params(dPre, X, grads.trunk_W, grads.trunk_b);
  }
}

double training_loss_and_grads(const Model& model, const Matrix& X,
                               const Matrix& soft_targets, const EnsembleSpec& ensemble,
                               const Vector& log_prior, ModelGrads& grads) {
  if (model.num_experts() != ensemble.num_experts()) {
    throw std::invalid_argument("training_loss_and_grads: heads/experts mismatch");
  }
  const int B = X.rows;
  const int C = model.num_classes;
  ForwardCache cache;
  forward(model, X, cache);

  const double inv = 1.0 / (static_cast<double>(B) * ensemble.num_experts());
  double loss_sum = 0.0;
  std::vector<Matrix> dLogits(model.num_experts());
  for (int e = 0; e < model.num_experts(); ++e) {
    const Vector tau = ensemble.experts[e].tau();
    Matrix adjusted(B, C);
    kernels::parallel_for(B, [&](int i) {
      const double* z = cache.logits[e].row(i);
      double* a = adjusted.row(i);
      for (int y = 0; y < C; ++y) a[y] = z[y] + tau[y] * log_prior[y];
    });
    Matrix probs;
    kernels::row_softmax(adjusted, probs);
    // Per-sample losses summed in index order.
    for (int i = 0; i < B; ++i) {
      const double* a = adjusted.row(i);
      const double* t = soft_targets.row(i);
      const double lse = kernels::log_sum_exp(a, C);
      for (int y = 0; y < C; ++y) {
        if (t[y] != 0.0) loss_sum -= t[y] * (a[y] - lse);
      }
    }
    dLogits[e] = Matrix(B, C);
    kernels::parallel_for(B, [&](int i) {
      const double* p = probs.row(i);
      const double* t = soft_targets.row(i);
      double* g = dLogits[e].row(i);
      for (int y = 0; y < C; ++y) g[y] = (p[y] - t[y]) * inv;
    });
  }
  backward(model, X, cache, dLogits, grads);
  return loss_sum * inv;
}

}  // namespace balpoe
