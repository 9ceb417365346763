#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace balpoe {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Small by design: the dimensions in
/// this project are (batch x features), (classes x hidden) and similar.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const {
    return data.data() + static_cast<std::size_t>(i) * cols;
  }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  std::size_t size() const { return data.size(); }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

/// Numeric failure (overflow, non-finite intermediates, divergence).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training diverged; message carries epoch/batch context.
struct training_error : numeric_error {
  using numeric_error::numeric_error;
};

/// Filesystem failure; message carries the offending path.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int argmax_lowest(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;  // strict: ties resolve to the lowest index
  }
  return best;
}

}  // namespace balpoe
