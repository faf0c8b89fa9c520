#include "reclap/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace reclap {

Tensor2D::Tensor2D(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw std::runtime_error("Tensor2D: data length " +
                             std::to_string(data.size()) + " does not match " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void Tensor2D::fill(double value) {
  for (auto& v : data) v = value;
}

void Tensor2D::require_finite(const std::string& context) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(context + ": non-finite entry");
    }
  }
}

double Tensor2D::row_norm(std::size_t r) const {
  double s = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    const double v = at(r, c);
    s += v * v;
  }
  return std::sqrt(s);
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols != b.rows) {
    throw std::runtime_error("matmul: inner dimensions disagree (" +
                             std::to_string(a.cols) + " vs " +
                             std::to_string(b.rows) + ")");
  }
  Tensor2D out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return out;
}

Tensor2D matmul_transpose_a(const Tensor2D& a, const Tensor2D& b) {
  if (a.rows != b.rows) {
    throw std::runtime_error("matmul_transpose_a: row counts disagree");
  }
  Tensor2D out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a.at(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aki * b.at(k, j);
      }
    }
  }
  return out;
}

Tensor2D matmul_transpose_b(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols != b.cols) {
    throw std::runtime_error("matmul_transpose_b: column counts disagree");
  }
  Tensor2D out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) {
        s += a.at(i, k) * b.at(j, k);
      }
      out.at(i, j) = s;
    }
  }
  return out;
}

Tensor2D transpose(const Tensor2D& a) {
  Tensor2D out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      out.at(j, i) = a.at(i, j);
    }
  }
  return out;
}

void require_shape(const Tensor2D& t, std::size_t rows, std::size_t cols,
                   const std::string& context) {
  if (t.rows != rows || t.cols != cols) {
    throw std::runtime_error(context + ": expected " + std::to_string(rows) +
                             "x" + std::to_string(cols) + ", got " +
                             std::to_string(t.rows) + "x" +
                             std::to_string(t.cols));
  }
}

}  // namespace reclap
