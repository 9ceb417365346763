#include "balpoe/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace balpoe::kernels {

namespace {
int g_max_threads = 0;

int effective_threads() {
#ifdef _OPENMP
  if (g_max_threads > 0) return g_max_threads;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Shared scalar routines. The parallel kernels call exactly these per output
// element, so serial and parallel paths agree bit-for-bit.
inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void softmax_row_impl(const double* z, int n, double* out) {
  double m = z[0];
  for (int i = 1; i < n; ++i) m = std::max(m, z[i]);
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(z[i] - m);
    denom += out[i];
  }
  double inv = 1.0 / denom;
  for (int i = 0; i < n; ++i) out[i] *= inv;
}
}  // namespace

void set_max_threads(int n) { g_max_threads = n < 0 ? 0 : n; }
int max_threads() { return g_max_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
#ifdef _OPENMP
  if (effective_threads() > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

void softmax_row(const double* logits, int n, double* out) {
  softmax_row_impl(logits, n, out);
}

double log_sum_exp(const double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

void linear_forward(const Matrix& X, const Matrix& W, const Vector& b, Matrix& out) {
  const int B = X.rows, D = X.cols, K = W.rows;
  out.rows = B;
  out.cols = K;
  out.data.resize(static_cast<std::size_t>(B) * K);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads()) if (effective_threads() > 1 && B > 1)
#endif
  for (int i = 0; i < B; ++i) {
    const double* x = X.row(i);
    double* o = out.row(i);
    for (int k = 0; k < K; ++k) o[k] = dot(W.row(k), x, D) + b[k];
  }
}

void linear_backward_input(const Matrix& dOut, const Matrix& W, Matrix& dX) {
  const int B = dOut.rows, K = dOut.cols, D = W.cols;
  dX.rows = B;
  dX.cols = D;
  dX.data.assign(static_cast<std::size_t>(B) * D, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads()) if (effective_threads() > 1 && B > 1)
#endif
  for (int i = 0; i < B; ++i) {
    const double* g = dOut.row(i);
    double* dx = dX.row(i);
    for (int k = 0; k < K; ++k) {
      const double gk = g[k];
      const double* wk = W.row(k);
      for (int d = 0; d < D; ++d) dx[d] += gk * wk[d];
    }
  }
}

void linear_grad_params(const Matrix& dOut, const Matrix& X, Matrix& dW, Vector& db) {
  const int B = dOut.rows, K = dOut.cols, D = X.cols;
  // Parallel across output entries; the batch reduction for each entry runs
  // in index order regardless of thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads()) if (effective_threads() > 1 && K > 1)
#endif
  for (int k = 0; k < K; ++k) {
    double* dwk = dW.row(k);
    double dbk = 0.0;
    for (int i = 0; i < B; ++i) {
      const double g = dOut.at(i, k);
      const double* x = X.row(i);
      dbk += g;
      for (int d = 0; d < D; ++d) dwk[d] += g * x[d];
    }
    db[k] += dbk;
  }
}

void row_softmax(const Matrix& logits, Matrix& out) {
  const int B = logits.rows, C = logits.cols;
  out.rows = B;
  out.cols = C;
  out.data.resize(static_cast<std::size_t>(B) * C);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads()) if (effective_threads() > 1 && B > 1)
#endif
  for (int i = 0; i < B; ++i) softmax_row_impl(logits.row(i), C, out.row(i));
}

namespace serial {

void linear_forward(const Matrix& X, const Matrix& W, const Vector& b, Matrix& out) {
  const int B = X.rows, D = X.cols, K = W.rows;
  out.rows = B;
  out.cols = K;
  out.data.resize(static_cast<std::size_t>(B) * K);
  for (int i = 0; i < B; ++i) {
    const double* x = X.row(i);
    double* o = out.row(i);
    for (int k = 0; k < K; ++k) o[k] = dot(W.row(k), x, D) + b[k];
  }
}

void linear_backward_input(const Matrix& dOut, const Matrix& W, Matrix& dX) {
  const int B = dOut.rows, K = dOut.cols, D = W.cols;
  dX.rows = B;
  dX.cols = D;
  dX.data.assign(static_cast<std::size_t>(B) * D, 0.0);
  for (int i = 0; i < B; ++i) {
    const double* g = dOut.row(i);
    double* dx = dX.row(i);
    for (int k = 0; k < K; ++k) {
      const double gk = g[k];
      const double* wk = W.row(k);
      for (int d = 0; d < D; ++d) dx[d] += gk * wk[d];
    }
  }
}

void linear_grad_params(const Matrix& dOut, const Matrix& X, Matrix& dW, Vector& db) {
  const int B = dOut.rows, K = dOut.cols, D = X.cols;
  for (int k = 0; k < K; ++k) {
    double* dwk = dW.row(k);
    double dbk = 0.0;
    for (int i = 0; i < B; ++i) {
      const double g = dOut.at(i, k);
      const double* x = X.row(i);
      dbk += g;
      for (int d = 0; d < D; ++d) dwk[d] += g * x[d];
    }
    db[k] += dbk;
  }
}

void row_softmax(const Matrix& logits, Matrix& out) {
  const int B = logits.rows, C = logits.cols;
  out.rows = B;
  out.cols = C;
  out.data.resize(static_cast<std::size_t>(B) * C);
  for (int i = 0; i < B; ++i) softmax_row_impl(logits.row(i), C, out.row(i));
}

}  // namespace serial

}  // namespace balpoe::kernels
