#pragma once

#include <cstdint>

#include "mdvdrp/nn/params.hpp"

namespace mdvdrp::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
struct AdamState {
  Vector<S> m;
  Vector<S> v;
  std::int64_t step = 0;

  explicit AdamState(Index n = 0) : m(Vector<S>::Zero(n)), v(Vector<S>::Zero(n)) {}
};

/// One bias-corrected adaptive-moment update. When `lr_scale` is given, parameter i uses
/// config.lr * lr_scale[i].
template <class S>
void adam_step(Vector<S>& params, const Vector<S>& grads, AdamState<S>& state, const AdamConfig& config,
               const Vector<S>* lr_scale = nullptr);

}  // namespace mdvdrp::nn
