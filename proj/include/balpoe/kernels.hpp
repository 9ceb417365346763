#pragma once

#include <functional>

#include "balpoe/core.hpp"

namespace balpoe::kernels {

/// Global thread cap for the OpenMP kernels. 1 disables parallel regions;
/// 0 means the OpenMP runtime default. Results are bit-identical for every
/// setting: parallelism only distributes independent output elements, never
/// reorders a floating-point reduction.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Iterations must be independent.
void parallel_for(int n, const std::function<void(int)>& fn);

/// out = X * W^T + b, out is (B x K), X is (B x D), W is (K x D).
void linear_forward(const Matrix& X, const Matrix& W, const Vector& b, Matrix& out);

/// dX = dOut * W, dX is (B x D), dOut is (B x K), W is (K x D).
void linear_backward_input(const Matrix& dOut, const Matrix& W, Matrix& dX);

/// dW += dOut^T * X, db += column sums of dOut. Each (k, d) entry reduces
/// over the batch in fixed serial order, so the result does not depend on
/// the thread count.
void linear_grad_params(const Matrix& dOut, const Matrix& X, Matrix& dW, Vector& db);

/// Row-wise softmax with max-subtraction, out may alias logits.
void row_softmax(const Matrix& logits, Matrix& out);

/// Serial reference implementations, kept as the oracle for the parallel
/// kernels and as the baseline in the benchmark tool.
namespace serial {
void linear_forward(const Matrix& X, const Matrix& W, const Vector& b, Matrix& out);
void linear_backward_input(const Matrix& dOut, const Matrix& W, Matrix& dX);
void linear_grad_params(const Matrix& dOut, const Matrix& X, Matrix& dW, Vector& db);
void row_softmax(const Matrix& logits, Matrix& out);
}  // namespace serial

/// Softmax of a single logit row; out may alias logits.
void softmax_row(const double* logits, int n, double* out);

/// log(sum(exp(v))) with max-subtraction.
double log_sum_exp(const double* v, int n);

}  // namespace balpoe::kernels
