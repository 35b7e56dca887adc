#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "calmnet/tensor.hpp"

namespace calmnet {

/// Central-difference verification of analytic gradients.
///
/// `f(compute_grad)` must evaluate a deterministic scalar objective (dropout
/// disabled, batch statistics frozen or recomputed identically); when
/// compute_grad is true it must also populate every parameter's grad field.
/// Returns the maximum relative error
///   |g_analytic - g_numeric| / max(1e-8, |g_analytic| + |g_numeric|)
/// over all parameter elements.
inline double gradcheck(const std::function<double(bool)>& f,
                        const std::vector<Parameter*>& params, double eps = 1e-5) {
  for (Parameter* p : params) p->zero_grad();
  f(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      p.value.data[i] = saved + eps;
      const double plus = f(false);
      p.value.data[i] = saved - eps;
      const double minus = f(false);
      p.value.data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double ga = analytic[pi].data[i];
      const double rel = std::abs(ga - numeric) /
                         std::max(1e-8, std::abs(ga) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace calmnet
