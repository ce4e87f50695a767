// Copyright 2026 The rrextreme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense row-major matrices and a Gauss-Jordan inverse with partial
// pivoting. Templated on the scalar so the same kernel runs in double or in
// a multiprecision type.

#ifndef RREXTREME_DENSE_MATRIX_H_
#define RREXTREME_DENSE_MATRIX_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace rrextreme {

template <typename T>
class BasicDenseMatrix {
 public:
  BasicDenseMatrix() = default;
  BasicDenseMatrix(size_t rows, size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static BasicDenseMatrix Identity(size_t n) {
    BasicDenseMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  T& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  std::span<const T> row(size_t r) const {
    return std::span<const T>(data_).subspan(r * cols_, cols_);
  }

  template <typename U>
  BasicDenseMatrix<U> Cast() const {
    BasicDenseMatrix<U> out(rows_, cols_);
    for (size_t r = 0; r < rows_; ++r) {
      for (size_t c = 0; c < cols_; ++c) {
        out(r, c) = static_cast<U>((*this)(r, c));
      }
    }
    return out;
  }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<T> data_;
};

using DenseMatrix = BasicDenseMatrix<double>;

template <typename T>
BasicDenseMatrix<T> Multiply(const BasicDenseMatrix<T>& a,
                             const BasicDenseMatrix<T>& b) {
  BasicDenseMatrix<T> out(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      for (size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

template <typename T>
BasicDenseMatrix<T> KroneckerProduct(const BasicDenseMatrix<T>& a,
                                     const BasicDenseMatrix<T>& b) {
  BasicDenseMatrix<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (size_t ar = 0; ar < a.rows(); ++ar) {
    for (size_t ac = 0; ac < a.cols(); ++ac) {
      const T scale = a(ar, ac);
      for (size_t br = 0; br < b.rows(); ++br) {
        for (size_t bc = 0; bc < b.cols(); ++bc) {
          out(ar * b.rows() + br, ac * b.cols() + bc) = scale * b(br, bc);
        }
      }
    }
  }
  return out;
}

// max_ij |(a * inverse - I)_ij|, accumulated in T.
template <typename T>
T MaxAbsResidualFromIdentity(const BasicDenseMatrix<T>& a,
                             const BasicDenseMatrix<T>& inverse) {
  using std::abs;
  const BasicDenseMatrix<T> product = Multiply(a, inverse);
  T worst(0);
  for (size_t i = 0; i < product.rows(); ++i) {
    for (size_t j = 0; j < product.cols(); ++j) {
      const T target = i == j ? T(1) : T(0);
      const T diff = abs(product(i, j) - target);
      if (diff > worst) worst = diff;
    }
  }
  return worst;
}

// Gauss-Jordan elimination on [a | I] with partial (row) pivoting.
// Returns InvalidArgument for a non-square input and FailedPrecondition when
// a pivot column is exactly zero. Ill-conditioning is not detected here;
// callers that need a guarantee check MaxAbsResidualFromIdentity.
template <typename T>
absl::StatusOr<BasicDenseMatrix<T>> InvertWithPartialPivoting(
    const BasicDenseMatrix<T>& a) {
  using std::abs;
  if (a.rows() != a.cols()) {
    return absl::InvalidArgumentError("cannot invert a non-square matrix");
  }
  const size_t n = a.rows();
  BasicDenseMatrix<T> work = a;
  BasicDenseMatrix<T> inv = BasicDenseMatrix<T>::Identity(n);

  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    T best = abs(work(col, col));
    for (size_t r = col + 1; r < n; ++r) {
      const T candidate = abs(work(r, col));
      if (candidate > best) {
        best = candidate;
        pivot = r;
      }
    }
    if (best == T(0)) {
      return absl::FailedPreconditionError(
          "matrix is singular: zero pivot column during elimination");
    }
    if (pivot != col) {
      for (size_t c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }

    const T scale = T(1) / work(col, col);
    for (size_t c = 0; c < n; ++c) {
      work(col, c) *= scale;
      inv(col, c) *= scale;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const T factor = work(r, col);
      if (factor == T(0)) continue;
      for (size_t c = 0; c < n; ++c) {
        work(r, c) -= factor * work(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace rrextreme

#endif  // RREXTREME_DENSE_MATRIX_H_
