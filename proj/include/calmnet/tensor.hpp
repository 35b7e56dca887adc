#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace calmnet {

class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense row-major array of doubles. Rank is dynamic; the layers below only
/// ever use ranks 1..3.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)),
        data(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                             std::multiplies<>()),
             fill) {}

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  std::size_t dim(std::size_t i) const { return shape.at(i); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator()(std::size_t i) { return data[i]; }
  double operator()(std::size_t i) const { return data[i]; }

  double& operator()(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  double& operator()(std::size_t b, std::size_t t, std::size_t f) {
    return data[(b * shape[1] + t) * shape[2] + f];
  }
  double operator()(std::size_t b, std::size_t t, std::size_t f) const {
    return data[(b * shape[1] + t) * shape[2] + f];
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  void check_finite(const char* what) const {
    for (double v : data)
      if (!std::isfinite(v))
        throw NumericError(std::string("non-finite value in ") + what);
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

inline void require_shape(const Tensor& t, const std::vector<std::size_t>& shape,
                          const char* what) {
  if (t.shape != shape) {
    Tensor want(shape);
    throw std::invalid_argument(std::string(what) + ": expected shape " +
                                want.shape_str() + ", got " + t.shape_str());
  }
}

/// C = A[m,k] * B[k,n]. Loop order keeps the inner accumulation contiguous.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0])
    throw std::invalid_argument("matmul: incompatible shapes " + a.shape_str() +
                                " x " + b.shape_str());
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &c.data[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &b.data[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

/// C = A^T[m,k]^T ... i.e. A[k,m] treated transposed: returns A^T * B with
/// A[k,m], B[k,n] -> [m,n]. Used for weight gradients without materializing
/// the transpose.
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[0] != b.shape[0])
    throw std::invalid_argument("matmul_tn: incompatible shapes " + a.shape_str() +
                                " x " + b.shape_str());
  const std::size_t k = a.shape[0], m = a.shape[1], n = b.shape[1];
  Tensor c({m, n});
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = &a.data[p * m];
    const double* brow = &b.data[p * n];
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = &c.data[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

/// Returns A * B^T with A[m,k], B[n,k] -> [m,n]. Used for input gradients.
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[1])
    throw std::invalid_argument("matmul_nt: incompatible shapes " + a.shape_str() +
                                " x " + b.shape_str());
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[0];
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &a.data[i * k];
    double* crow = &c.data[i * n];
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = &b.data[j * k];
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
  return c;
}

/// Adds a length-n row vector to every row of x[m,n].
inline void add_row_vector(Tensor& x, const Tensor& v) {
  if (x.rank() != 2 || v.size() != x.shape[1])
    throw std::invalid_argument("add_row_vector: shape mismatch");
  const std::size_t m = x.shape[0], n = x.shape[1];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) x.data[i * n + j] += v.data[j];
}

/// Copies row `t` of the time axis out of a [B,T,D] tensor as [B,D].
inline Tensor slice_time(const Tensor& seq, std::size_t t) {
  const std::size_t b = seq.shape[0], steps = seq.shape[1], d = seq.shape[2];
  if (t >= steps) throw std::out_of_range("slice_time");
  Tensor out({b, d});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = seq(i, t, j);
  return out;
}

inline void set_time(Tensor& seq, std::size_t t, const Tensor& x) {
  const std::size_t b = seq.shape[0], d = seq.shape[2];
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < d; ++j) seq(i, t, j) = x(i, j);
}

/// Trainable tensor plus its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace calmnet
