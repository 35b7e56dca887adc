#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "calmnet/rng.hpp"
#include "calmnet/tensor.hpp"

namespace calmnet {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Fully connected layer y = x W + b.
///   forward caches x; backward accumulates
///   dW += x^T dy, db += sum_B dy, and returns dx = dy W^T.
class Dense {
 public:
  Dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
      : w(name + ".w", {in, out}), b(name + ".b", {out}) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : w.value.data) v = rng.uniform(-bound, bound);
  }

  Tensor forward(const Tensor& x) {
    if (x.rank() != 2 || x.shape[1] != w.value.shape[0])
      throw std::invalid_argument("dense '" + w.name + "': input " + x.shape_str());
    x_ = x;
    Tensor y = matmul(x, w.value);
    add_row_vector(y, b.value);
    y.check_finite(w.name.c_str());
    return y;
  }

  Tensor backward(const Tensor& dy) {
    const Tensor dw = matmul_tn(x_, dy);
    for (std::size_t i = 0; i < dw.size(); ++i) w.grad.data[i] += dw.data[i];
    const std::size_t bsz = dy.shape[0], n = dy.shape[1];
    for (std::size_t i = 0; i < bsz; ++i)
      for (std::size_t j = 0; j < n; ++j) b.grad.data[j] += dy(i, j);
    return matmul_nt(dy, w.value);
  }

  std::size_t in_dim() const { return w.value.shape[0]; }
  std::size_t out_dim() const { return w.value.shape[1]; }

  std::vector<Parameter*> parameters() { return {&w, &b}; }

  Parameter w;
  Parameter b;

 private:
  Tensor x_;
};

class Tanh {
 public:
  Tensor forward(const Tensor& x) {
    y_ = x;
    for (double& v : y_.data) v = std::tanh(v);
    return y_;
  }
  Tensor backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
      dx.data[i] *= 1.0 - y_.data[i] * y_.data[i];
    return dx;
  }

 private:
  Tensor y_;
};

class Relu {
 public:
  Tensor forward(const Tensor& x) {
    x_ = x;
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
  }
  Tensor backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (x_.data[i] <= 0.0) dx.data[i] = 0.0;
    return dx;
  }

 private:
  Tensor x_;
};

/// Batch normalization over the batch axis of [B,F].
/// Train mode normalizes by batch statistics (biased variance, eps 1e-5) and
/// updates running statistics with momentum 0.1; eval mode uses the running
/// statistics. Train mode requires B >= 2.
class BatchNorm1d {
 public:
  BatchNorm1d(const std::string& name, std::size_t features)
      : gamma(name + ".gamma", {features}),
        beta(name + ".beta", {features}),
        running_mean(name + ".running_mean", {features}),
        running_var(name + ".running_var", {features}) {
    gamma.value.fill(1.0);
    running_var.value.fill(1.0);
  }

  Tensor forward(const Tensor& x, bool train) {
    const std::size_t bsz = x.shape[0], f = x.shape[1];
    if (x.rank() != 2 || f != gamma.value.size())
      throw std::invalid_argument("batchnorm '" + gamma.name + "': input " + x.shape_str());
    train_ = train;
    if (train && bsz < 2)
      throw std::invalid_argument("batchnorm '" + gamma.name +
                                  "' needs a batch of at least 2 in train mode");
    Tensor mean({f}), var({f});
    if (train) {
      for (std::size_t j = 0; j < f; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < bsz; ++i) m += x(i, j);
        m /= static_cast<double>(bsz);
        double v = 0.0;
        for (std::size_t i = 0; i < bsz; ++i) {
          const double d = x(i, j) - m;
          v += d * d;
        }
        v /= static_cast<double>(bsz);
        mean(j) = m;
        var(j) = v;
        running_mean.value(j) = (1.0 - momentum_) * running_mean.value(j) + momentum_ * m;
        running_var.value(j) = (1.0 - momentum_) * running_var.value(j) + momentum_ * v;
      }
    } else {
      mean = running_mean.value;
      var = running_var.value;
    }
    inv_std_ = Tensor({f});
    for (std::size_t j = 0; j < f; ++j) inv_std_(j) = 1.0 / std::sqrt(var(j) + eps_);
    xhat_ = Tensor({bsz, f});
    Tensor y({bsz, f});
    for (std::size_t i = 0; i < bsz; ++i)
      for (std::size_t j = 0; j < f; ++j) {
        xhat_(i, j) = (x(i, j) - mean(j)) * inv_std_(j);
        y(i, j) = gamma.value(j) * xhat_(i, j) + beta.value(j);
      }
    y.check_finite(gamma.name.c_str());
    return y;
  }

  Tensor backward(const Tensor& dy) {
    const std::size_t bsz = dy.shape[0], f = dy.shape[1];
    Tensor dx({bsz, f});
    for (std::size_t j = 0; j < f; ++j) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t i = 0; i < bsz; ++i) {
        sum_dy += dy(i, j);
        sum_dy_xhat += dy(i, j) * xhat_(i, j);
      }
      gamma.grad(j) += sum_dy_xhat;
      beta.grad(j) += sum_dy;
      const double scale = gamma.value(j) * inv_std_(j);
      if (train_) {
        const double inv_b = 1.0 / static_cast<double>(bsz);
        for (std::size_t i = 0; i < bsz; ++i)
          dx(i, j) = scale * (dy(i, j) - inv_b * sum_dy - inv_b * xhat_(i, j) * sum_dy_xhat);
      } else {
        for (std::size_t i = 0; i < bsz; ++i) dx(i, j) = scale * dy(i, j);
      }
    }
    return dx;
  }

  std::vector<Parameter*> parameters() { return {&gamma, &beta}; }
  /// Running statistics; persisted in checkpoints but never optimized.
  std::vector<Parameter*> buffers() { return {&running_mean, &running_var}; }

  Parameter gamma, beta;
  Parameter running_mean, running_var;

 private:
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  bool train_ = false;
  Tensor xhat_, inv_std_;
};

/// Inverted dropout: train mode zeroes each element with probability p and
/// scales survivors by 1/(1-p); eval mode is the identity.
class Dropout {
 public:
  explicit Dropout(double p) : p_(p) {
    if (p < 0.0 || p >= 1.0)
      throw std::invalid_argument("dropout probability must lie in [0,1), got " +
                                  std::to_string(p));
  }

  Tensor forward(const Tensor& x, bool train, Rng& rng) {
    if (!train || p_ == 0.0) {
      identity_ = true;
      return x;
    }
    identity_ = false;
    mask_ = Tensor(x.shape);
    const double keep = 1.0 - p_;
    Tensor y = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mask_.data[i] = rng.uniform() < p_ ? 0.0 : 1.0 / keep;
      y.data[i] *= mask_.data[i];
    }
    return y;
  }

  Tensor backward(const Tensor& dy) {
    if (identity_) return dy;
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= mask_.data[i];
    return dx;
  }

  double p() const { return p_; }

 private:
  double p_;
  bool identity_ = true;
  Tensor mask_;
};

struct LstmState {
  Tensor h;  // [B,H]
  Tensor c;  // [B,H]

  static LstmState zeros(std::size_t batch, std::size_t hidden) {
    return {Tensor({batch, hidden}), Tensor({batch, hidden})};
  }
};

/// Standard LSTM cell: gates i,f,o sigmoid, candidate g tanh,
/// c' = f*c + i*g, h' = o*tanh(c'). Gate order along the 4H axis is i,f,g,o.
/// The forget-gate bias is initialized to 1.
class Lstm {
 public:
  Lstm(const std::string& name, std::size_t input, std::size_t hidden, Rng& rng)
      : w_x(name + ".w_x", {input, 4 * hidden}),
        w_h(name + ".w_h", {hidden, 4 * hidden}),
        b(name + ".b", {4 * hidden}),
        input_(input),
        hidden_(hidden) {
    const double bx = 1.0 / std::sqrt(static_cast<double>(input));
    const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& v : w_x.value.data) v = rng.uniform(-bx, bx);
    for (double& v : w_h.value.data) v = rng.uniform(-bh, bh);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) b.value(j) = 1.0;
  }

  /// One recurrence step with no side effects; the training path below caches
  /// the same quantities per step.
  LstmState step(const Tensor& x_t, const LstmState& state) const {
    StepCache cache;
    return step_impl(x_t, state, cache);
  }

  /// Unrolls the cell over seq [B,T,D] from a zero initial state and returns
  /// every hidden state as [B,T,H]. Caches activations for backward().
  Tensor forward(const Tensor& seq) {
    if (seq.rank() != 3 || seq.shape[2] != input_)
      throw std::invalid_argument("lstm '" + b.name + "': input " + seq.shape_str());
    const std::size_t bsz = seq.shape[0], steps = seq.shape[1];
    if (steps == 0) throw std::invalid_argument("lstm '" + b.name + "': empty sequence");
    seq_ = seq;
    caches_.assign(steps, StepCache{});
    LstmState state = LstmState::zeros(bsz, hidden_);
    Tensor all_h({bsz, steps, hidden_});
    for (std::size_t t = 0; t < steps; ++t) {
      caches_[t].h_prev = state.h;
      caches_[t].c_prev = state.c;
      state = step_impl(slice_time(seq, t), state, caches_[t]);
      set_time(all_h, t, state.h);
    }
    all_h.check_finite(b.name.c_str());
    return all_h;
  }

  static Tensor last_hidden(const Tensor& all_h) {
    return slice_time(all_h, all_h.shape[1] - 1);
  }

  /// Backpropagation through time. d_all_h is the loss gradient w.r.t. every
  /// hidden state [B,T,H] (zero rows for unused steps). Accumulates parameter
  /// gradients and returns the gradient w.r.t. the input sequence [B,T,D].
  Tensor backward(const Tensor& d_all_h) {
    const std::size_t bsz = d_all_h.shape[0], steps = d_all_h.shape[1];
    Tensor d_seq({bsz, steps, input_});
    Tensor dh_carry({bsz, hidden_});
    Tensor dc_carry({bsz, hidden_});
    for (std::size_t t = steps; t-- > 0;) {
      const StepCache& s = caches_[t];
      Tensor dgates({bsz, 4 * hidden_});
      for (std::size_t i = 0; i < bsz; ++i) {
        for (std::size_t j = 0; j < hidden_; ++j) {
          const double dh = d_all_h(i, t, j) + dh_carry(i, j);
          const double tc = s.tanh_c(i, j);
          const double iv = s.i(i, j), fv = s.f(i, j), gv = s.g(i, j), ov = s.o(i, j);
          const double do_ = dh * tc;
          const double dc = dh * ov * (1.0 - tc * tc) + dc_carry(i, j);
          const double di = dc * gv;
          const double df = dc * s.c_prev(i, j);
          const double dg = dc * iv;
          dgates(i, j) = di * iv * (1.0 - iv);
          dgates(i, hidden_ + j) = df * fv * (1.0 - fv);
          dgates(i, 2 * hidden_ + j) = dg * (1.0 - gv * gv);
          dgates(i, 3 * hidden_ + j) = do_ * ov * (1.0 - ov);
          dc_carry(i, j) = dc * fv;
        }
      }
      const Tensor x_t = slice_time(seq_, t);
      const Tensor dwx = matmul_tn(x_t, dgates);
      for (std::size_t i = 0; i < dwx.size(); ++i) w_x.grad.data[i] += dwx.data[i];
      const Tensor dwh = matmul_tn(s.h_prev, dgates);
      for (std::size_t i = 0; i < dwh.size(); ++i) w_h.grad.data[i] += dwh.data[i];
      for (std::size_t i = 0; i < bsz; ++i)
        for (std::size_t j = 0; j < 4 * hidden_; ++j) b.grad(j) += dgates(i, j);
      set_time(d_seq, t, matmul_nt(dgates, w_x.value));
      dh_carry = matmul_nt(dgates, w_h.value);
    }
    return d_seq;
  }

  std::size_t hidden_size() const { return hidden_; }
  std::size_t input_size() const { return input_; }

  std::vector<Parameter*> parameters() { return {&w_x, &w_h, &b}; }

  Parameter w_x, w_h, b;

 private:
  struct StepCache {
    Tensor h_prev, c_prev;
    Tensor i, f, g, o;
    Tensor tanh_c;
  };

  LstmState step_impl(const Tensor& x_t, const LstmState& state, StepCache& cache) const {
    if (x_t.rank() != 2 || x_t.shape[1] != input_ || state.h.rank() != 2 ||
        state.h.shape[1] != hidden_ || state.h.shape[0] != x_t.shape[0] ||
        !state.h.same_shape(state.c))
      throw std::invalid_argument("lstm '" + b.name + "': step shape mismatch");
    const std::size_t bsz = x_t.shape[0];
    Tensor gates = matmul(x_t, w_x.value);
    const Tensor hg = matmul(state.h, w_h.value);
    for (std::size_t i = 0; i < gates.size(); ++i) gates.data[i] += hg.data[i];
    add_row_vector(gates, b.value);
    cache.i = Tensor({bsz, hidden_});
    cache.f = Tensor({bsz, hidden_});
    cache.g = Tensor({bsz, hidden_});
    cache.o = Tensor({bsz, hidden_});
    cache.tanh_c = Tensor({bsz, hidden_});
    LstmState next = LstmState::zeros(bsz, hidden_);
    for (std::size_t i = 0; i < bsz; ++i) {
      for (std::size_t j = 0; j < hidden_; ++j) {
        const double iv = sigmoid(gates(i, j));
        const double fv = sigmoid(gates(i, hidden_ + j));
        const double gv = std::tanh(gates(i, 2 * hidden_ + j));
        const double ov = sigmoid(gates(i, 3 * hidden_ + j));
        const double cv = fv * state.c(i, j) + iv * gv;
        const double tc = std::tanh(cv);
        cache.i(i, j) = iv;
        cache.f(i, j) = fv;
        cache.g(i, j) = gv;
        cache.o(i, j) = ov;
        cache.tanh_c(i, j) = tc;
        next.c(i, j) = cv;
        next.h(i, j) = ov * tc;
      }
    }
    next.h.check_finite(b.name.c_str());
    return next;
  }

  std::vector<StepCache> caches_;
  Tensor seq_;
  std::size_t input_;
  std::size_t hidden_;
};

}  // namespace calmnet
