#include "mdvdrp/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace mdvdrp::nn {

DenseLayer DenseLayer::create(ParamLayout& layout, const std::string& name, Index in, Index out, Activation act) {
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.activation = act;
  l.weight_offset = layout.add(name + ".weight", out, in);
  l.bias_offset = layout.add(name + ".bias", out, 1);
  return l;
}

template <class S>
void DenseLayer::init(S* params, std::mt19937_64& rng) const {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> u(-limit, limit);
  auto w = weight(params);
  for (Index j = 0; j < w.cols(); ++j) {
    for (Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<S>(u(rng));
  }
  bias(params).setZero();
}

template <class S>
void activate(Matrix<S>& z, Activation act) {
  switch (act) {
    case Activation::None: break;
    case Activation::ReLU: z = z.cwiseMax(S(0)); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
    case Activation::Sigmoid: z = (S(1) / (S(1) + (-z.array()).exp())).matrix(); break;
  }
}

template <class S>
void activation_backward(const Matrix<S>& y, Activation act, Matrix<S>& grad) {
  switch (act) {
    case Activation::None: break;
    case Activation::ReLU: grad = (y.array() > S(0)).select(grad, S(0)); break;
    case Activation::Tanh: grad.array() *= (S(1) - y.array().square()); break;
    case Activation::Sigmoid: grad.array() *= y.array() * (S(1) - y.array()); break;
  }
}

Mlp Mlp::create(ParamLayout& layout, const std::string& prefix, const std::vector<Index>& dims,
                const std::vector<Activation>& acts) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1) throw std::invalid_argument("Mlp: bad dims/acts");
  Mlp m;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    m.layers.push_back(DenseLayer::create(layout, prefix + "." + std::to_string(i), dims[i], dims[i + 1], acts[i]));
  }
  return m;
}

template <class S>
Matrix<S> mlp_forward(const Mlp& mlp, const S* params, const Matrix<S>& x, MlpCache<S>* cache) {
  if (x.rows() != mlp.in()) {
    throw std::invalid_argument("mlp_forward: expected " + std::to_string(mlp.in()) + " input rows, got " +
                                std::to_string(x.rows()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Matrix<S> h = x;
  for (const auto& layer : mlp.layers) {
    Matrix<S> z(layer.out, h.cols());
    z.noalias() = layer.weight(params) * h;
    z.colwise() += layer.bias(params);
    activate(z, layer.activation);
    if (cache) cache->inputs.push_back(std::move(h));
    h = std::move(z);
    if (cache) cache->outputs.push_back(h);
  }
  return h;
}

template <class S>
Matrix<S> mlp_backward(const Mlp& mlp, const S* params, const MlpCache<S>& cache, const Matrix<S>& dy, S* grads,
                       bool need_dx) {
  Matrix<S> g = dy;
  for (std::size_t k = mlp.layers.size(); k-- > 0;) {
    const auto& layer = mlp.layers[k];
    activation_backward(cache.outputs[k], layer.activation, g);
    layer.weight(grads).noalias() += g * cache.inputs[k].transpose();
    layer.bias(grads) += g.rowwise().sum();
    if (k == 0 && !need_dx) return {};
    Matrix<S> dx(layer.in, g.cols());
    dx.noalias() = layer.weight(params).transpose() * g;
    g = std::move(dx);
  }
  return g;
}

template <class S>
Vector<S> softmax(const Vector<S>& x) {
  if (x.size() == 0) throw std::invalid_argument("softmax of an empty vector");
  Vector<S> e = (x.array() - x.maxCoeff()).exp().matrix();
  return e / e.sum();
}

template <class S>
Vector<S> log_softmax(const Vector<S>& x) {
  if (x.size() == 0) throw std::invalid_argument("log_softmax of an empty vector");
  const S m = x.maxCoeff();
  const S lse = m + std::log((x.array() - m).exp().sum());
  return (x.array() - lse).matrix();
}

#define MDVDRP_INSTANTIATE(S)                                                                                      \
  template void DenseLayer::init<S>(S*, std::mt19937_64&) const;                                                  \
  template void activate<S>(Matrix<S>&, Activation);                                                               \
  template void activation_backward<S>(const Matrix<S>&, Activation, Matrix<S>&);                                  \
  template Matrix<S> mlp_forward<S>(const Mlp&, const S*, const Matrix<S>&, MlpCache<S>*);                         \
  template Matrix<S> mlp_backward<S>(const Mlp&, const S*, const MlpCache<S>&, const Matrix<S>&, S*, bool);        \
  template Vector<S> softmax<S>(const Vector<S>&);                                                                 \
  template Vector<S> log_softmax<S>(const Vector<S>&);

MDVDRP_INSTANTIATE(float)
MDVDRP_INSTANTIATE(double)

#undef MDVDRP_INSTANTIATE

}  // namespace mdvdrp::nn
