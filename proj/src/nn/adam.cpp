#include "mdvdrp/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mdvdrp::nn {

template <class S>
void adam_step(Vector<S>& params, const Vector<S>& grads, AdamState<S>& state, const AdamConfig& config,
               const Vector<S>* lr_scale) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size() ||
      (lr_scale && lr_scale->size() != params.size())) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  ++state.step;
  const auto b1 = static_cast<S>(config.beta1);
  const auto b2 = static_cast<S>(config.beta2);
  state.m = b1 * state.m + (S(1) - b1) * grads;
  state.v = b2 * state.v + (S(1) - b2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const auto step_size = static_cast<S>(config.lr / c1);
  const auto root_c2 = static_cast<S>(std::sqrt(c2));
  const auto eps = static_cast<S>(config.eps);
  auto update = (step_size * state.m.array() / (state.v.array().sqrt() / root_c2 + eps));
  if (lr_scale) {
    params.array() -= update * lr_scale->array();
  } else {
    params.array() -= update;
  }
}

template void adam_step<float>(Vector<float>&, const Vector<float>&, AdamState<float>&, const AdamConfig&,
                               const Vector<float>*);
template void adam_step<double>(Vector<double>&, const Vector<double>&, AdamState<double>&, const AdamConfig&,
                                const Vector<double>*);

}  // namespace mdvdrp::nn
