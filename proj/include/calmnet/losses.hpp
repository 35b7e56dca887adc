#pragma once

#include <cmath>
#include <vector>

#include "calmnet/core.hpp"
#include "calmnet/tensor.hpp"

namespace calmnet {

/// Row-wise softmax with max subtraction.
inline Tensor softmax_rows(const Tensor& logits) {
  const std::size_t bsz = logits.shape[0], k = logits.shape[1];
  Tensor p({bsz, k});
  for (std::size_t i = 0; i < bsz; ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p(i, j) = std::exp(logits(i, j) - mx);
      z += p(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) p(i, j) /= z;
  }
  return p;
}

/// Weighted categorical cross-entropy over [B,3] logits:
///   loss = (1/B) sum_b w[y_b] * (-log softmax(logits_b)[y_b]).
/// When dlogits is non-null it receives w[y_b] * (softmax - onehot) / B.
inline double weighted_cross_entropy(const Tensor& logits,
                                     const std::vector<StressClass>& targets,
                                     const ClassWeights& weights,
                                     Tensor* dlogits = nullptr) {
  const std::size_t bsz = logits.shape[0], k = logits.shape[1];
  if (logits.rank() != 2 || targets.size() != bsz)
    throw std::invalid_argument("cross_entropy: logits " + logits.shape_str() + " vs " +
                                std::to_string(targets.size()) + " targets");
  logits.check_finite("cross_entropy logits");
  const Tensor p = softmax_rows(logits);
  double loss = 0.0;
  if (dlogits) *dlogits = Tensor({bsz, k});
  for (std::size_t i = 0; i < bsz; ++i) {
    const auto y = static_cast<std::size_t>(targets[i]);
    const double w = weights.w[y];
    loss += w * -std::log(std::max(p(i, y), 1e-300));
    if (dlogits) {
      for (std::size_t j = 0; j < k; ++j)
        (*dlogits)(i, j) = w * (p(i, j) - (j == y ? 1.0 : 0.0)) / static_cast<double>(bsz);
    }
  }
  return loss / static_cast<double>(bsz);
}

/// Mean absolute error over all elements. When dxhat is non-null it receives
/// the subgradient sign(xhat - x) / N, zero at ties.
inline double mean_absolute_error(const Tensor& x, const Tensor& xhat,
                                  Tensor* dxhat = nullptr) {
  if (!x.same_shape(xhat))
    throw std::invalid_argument("mae: shape mismatch " + x.shape_str() + " vs " +
                                xhat.shape_str());
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  if (dxhat) *dxhat = Tensor(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = xhat.data[i] - x.data[i];
    acc += std::abs(d);
    if (dxhat) dxhat->data[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  return acc / n;
}

/// The training objective of the autoencoder model: alpha*RE + beta*CE.
inline double combined_loss(double reconstruction_error, double classification_error,
                            double alpha, double beta) {
  return alpha * reconstruction_error + beta * classification_error;
}

}  // namespace calmnet
