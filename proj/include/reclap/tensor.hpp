#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace reclap {

// Dense row-major matrix of 64-bit floats. All training math runs in
// doubles; checkpoints store the 32-bit projection (see checkpoint.hpp).
struct Tensor2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2D() = default;
  Tensor2D(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Tensor2D(std::size_t r, std::size_t c, std::vector<double> values);

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const { return rows * cols; }
  bool same_shape(const Tensor2D& other) const {
    return rows == other.rows && cols == other.cols;
  }

  void fill(double value);
  void zero() { fill(0.0); }

  // Throws if any entry is NaN or infinite; `context` names the tensor in
  // the error message.
  void require_finite(const std::string& context) const;

  double row_norm(std::size_t r) const;
};

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
// a^T * b  (a is k x m, b is k x n, result m x n)
Tensor2D matmul_transpose_a(const Tensor2D& a, const Tensor2D& b);
// a * b^T  (a is m x k, b is n x k, result m x n)
Tensor2D matmul_transpose_b(const Tensor2D& a, const Tensor2D& b);

Tensor2D transpose(const Tensor2D& a);

void require_shape(const Tensor2D& t, std::size_t rows, std::size_t cols,
                   const std::string& context);

}  // namespace reclap
