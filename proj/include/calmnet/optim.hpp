#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "calmnet/tensor.hpp"

namespace calmnet {

enum class OptimizerKind { Sgd, Adaptive };

inline const char* optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::Sgd ? "sgd" : "adaptive";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adaptive") return OptimizerKind::Adaptive;
  throw std::invalid_argument("unknown optimizer '" + s + "' (sgd|adaptive)");
}

/// Sgd:      theta -= lr * (g + wd * theta)
/// Adaptive: bias-corrected first/second moments (beta1 0.9, beta2 0.999,
///           eps 1e-8) with decoupled weight decay theta -= lr * wd * theta
///           applied separately from the moment update.
class Optimizer {
 public:
  Optimizer(std::vector<Parameter*> params, OptimizerKind kind, double lr,
            double weight_decay)
      : params_(std::move(params)), kind_(kind), lr_(lr), wd_(weight_decay) {
    if (kind_ == OptimizerKind::Adaptive) {
      m_.reserve(params_.size());
      v_.reserve(params_.size());
      for (const Parameter* p : params_) {
        m_.emplace_back(p->value.shape);
        v_.emplace_back(p->value.shape);
      }
    }
  }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      Parameter& p = *params_[pi];
      if (kind_ == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < p.value.size(); ++i)
          p.value.data[i] -= lr_ * (p.grad.data[i] + wd_ * p.value.data[i]);
      } else {
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          const double g = p.grad.data[i];
          m_[pi].data[i] = beta1_ * m_[pi].data[i] + (1.0 - beta1_) * g;
          v_[pi].data[i] = beta2_ * v_[pi].data[i] + (1.0 - beta2_) * g * g;
          const double mhat = m_[pi].data[i] / bc1;
          const double vhat = v_[pi].data[i] / bc2;
          p.value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
          p.value.data[i] -= lr_ * wd_ * p.value.data[i];
        }
      }
      for (double v : p.value.data)
        if (!std::isfinite(v))
          throw NumericError("non-finite update in parameter '" + p.name + "'");
    }
  }

  double lr() const { return lr_; }

 private:
  std::vector<Parameter*> params_;
  OptimizerKind kind_;
  double lr_;
  double wd_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace calmnet
