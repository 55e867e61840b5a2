#pragma once

#include <random>
#include <string>
#include <vector>

#include "mdvdrp/nn/params.hpp"

namespace mdvdrp::nn {

enum class Activation { None, ReLU, Tanh, Sigmoid };

/// Affine map plus activation. Weights (out x in) and bias (out) live in a ParamLayout.
struct DenseLayer {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  Index in = 0;
  Index out = 0;
  Activation activation = Activation::None;

  static DenseLayer create(ParamLayout& layout, const std::string& name, Index in, Index out, Activation act);

  template <class S>
  Eigen::Map<const Matrix<S>> weight(const S* params) const {
    return Eigen::Map<const Matrix<S>>(params + weight_offset, out, in);
  }
  template <class S>
  Eigen::Map<const Vector<S>> bias(const S* params) const {
    return Eigen::Map<const Vector<S>>(params + bias_offset, out);
  }
  template <class S>
  Eigen::Map<Matrix<S>> weight(S* params) const {
    return Eigen::Map<Matrix<S>>(params + weight_offset, out, in);
  }
  template <class S>
  Eigen::Map<Vector<S>> bias(S* params) const {
    return Eigen::Map<Vector<S>>(params + bias_offset, out);
  }

  /// Uniform in +-sqrt(6 / (in + out)); zero bias.
  template <class S>
  void init(S* params, std::mt19937_64& rng) const;
};

/// Applies `act` in place.
template <class S>
void activate(Matrix<S>& z, Activation act);

/// Multiplies `grad` in place by the activation derivative, expressed through the output `y`.
template <class S>
void activation_backward(const Matrix<S>& y, Activation act, Matrix<S>& grad);

struct Mlp {
  std::vector<DenseLayer> layers;

  /// `dims` = {in, hidden..., out}; `acts` has one entry per layer.
  static Mlp create(ParamLayout& layout, const std::string& prefix, const std::vector<Index>& dims,
                    const std::vector<Activation>& acts);

  Index in() const { return layers.front().in; }
  Index out() const { return layers.back().out; }

  template <class S>
  void init(S* params, std::mt19937_64& rng) const {
    for (const auto& l : layers) l.init(params, rng);
  }
};

/// Inputs and outputs of every layer; columns are batch entries.
template <class S>
struct MlpCache {
  std::vector<Matrix<S>> inputs;
  std::vector<Matrix<S>> outputs;
};

template <class S>
Matrix<S> mlp_forward(const Mlp& mlp, const S* params, const Matrix<S>& x, MlpCache<S>* cache);

/// Accumulates parameter gradients into `grads` and returns dL/dx (empty when !need_dx).
template <class S>
Matrix<S> mlp_backward(const Mlp& mlp, const S* params, const MlpCache<S>& cache, const Matrix<S>& dy, S* grads,
                       bool need_dx = true);

/// Numerically stable softmax.
template <class S>
Vector<S> softmax(const Vector<S>& x);

template <class S>
Vector<S> log_softmax(const Vector<S>& x);

}  // namespace mdvdrp::nn
