// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// AdamW with decoupled weight decay, a linear-warmup cosine schedule, and
// an exponential moving average of the parameters.

#pragma once

#include "vgru/param.hpp"

namespace vgru {

struct ScheduleConfig {
  double lr_max = 1e-3;
  double lr_min = 1e-5;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;
};

// Linear warmup to lr_max, then lr_min + (lr_max-lr_min)/2 * (1+cos(pi*p)).
inline double cosine_lr(std::size_t step, const ScheduleConfig& s) {
  if (step < s.warmup_steps)
    return s.lr_max * double(step + 1) / double(s.warmup_steps);
  const std::size_t span =
      s.total_steps > s.warmup_steps ? s.total_steps - s.warmup_steps : 1;
  double p = double(step - s.warmup_steps) / double(span);
  if (p > 1.0) p = 1.0;
  return s.lr_min + 0.5 * (s.lr_max - s.lr_min) * (1.0 + std::cos(3.141592653589793 * p));
}

// Published scaling rule: 1e-3 * batch / 1024.
inline double scaled_lr(std::size_t batch) {
  return 1e-3 * double(batch) / 1024.0;
}

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

template <typename T>
class AdamW {
 public:
  AdamW() = default;
  AdamW(AdamWConfig cfg, ScheduleConfig sched) : cfg_(cfg), sched_(sched) {}

  void attach(const std::vector<Param<T>*>& params) {
    slots_.clear();
    for (auto* p : params)
      slots_.push_back(Slot{Tensor<T>(p->value.shape()), Tensor<T>(p->value.shape())});
  }

  // One update from the accumulated gradients. Returns the lr used.
  double step(const std::vector<Param<T>*>& params) {
    if (slots_.size() != params.size())
      throw std::logic_error("optimizer not attached to this parameter set");
    const double lr = cosine_lr(static_cast<std::size_t>(step_count_), sched_);
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Param<T>& p = *params[i];
      Slot& s = slots_[i];
      T* w = p.value.data();
      const T* g = p.grad.data();
      T* m = s.m.data();
      T* v = s.v.data();
      for (std::size_t j = 0, n = p.value.numel(); j < n; ++j) {
        m[j] = T(cfg_.beta1) * m[j] + T(1.0 - cfg_.beta1) * g[j];
        v[j] = T(cfg_.beta2) * v[j] + T(1.0 - cfg_.beta2) * g[j] * g[j];
        const double mhat = double(m[j]) / bc1;
        const double vhat = double(v[j]) / bc2;
        const double upd = mhat / (std::sqrt(vhat) + cfg_.eps) +
                           cfg_.weight_decay * double(w[j]);
        w[j] = T(double(w[j]) - lr * upd);
      }
    }
    return lr;
  }

  long long step_count() const { return step_count_; }
  void set_step_count(long long c) { step_count_ = c; }

  const AdamWConfig& config() const { return cfg_; }
  const ScheduleConfig& schedule() const { return sched_; }

  // Moment tensors, exposed for checkpointing.
  Tensor<T>& moment1(std::size_t i) { return slots_[i].m; }
  Tensor<T>& moment2(std::size_t i) { return slots_[i].v; }
  std::size_t size() const { return slots_.size(); }

 private:
  struct Slot {
    Tensor<T> m, v;
  };
  std::vector<Slot> slots_;
  long long step_count_ = 0;
  AdamWConfig cfg_;
  ScheduleConfig sched_;
};

template <typename T>
class Ema {
 public:
  Ema() = default;
  explicit Ema(double decay) : decay_(decay) {}

  void attach(const std::vector<Param<T>*>& params) {
    shadow_.clear();
    for (auto* p : params) shadow_.push_back(p->value);
  }

  void update(const std::vector<Param<T>*>& params) {
    const T d = T(decay_), od = T(1.0 - decay_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      T* s = shadow_[i].data();
      const T* w = params[i]->value.data();
      for (std::size_t j = 0, n = shadow_[i].numel(); j < n; ++j)
        s[j] = d * s[j] + od * w[j];
    }
  }

  // Copies the shadow weights into the parameters (for evaluation).
  void copy_to(const std::vector<Param<T>*>& params) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->value = shadow_[i];
  }

  double decay() const { return decay_; }
  Tensor<T>& shadow(std::size_t i) { return shadow_[i]; }
  const Tensor<T>& shadow(std::size_t i) const { return shadow_[i]; }
  std::size_t size() const { return shadow_.size(); }

 private:
  std::vector<Tensor<T>> shadow_;
  double decay_ = 0.9999;
};

}  // namespace vgru
