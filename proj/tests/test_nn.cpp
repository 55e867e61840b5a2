#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "mdvdrp/nn/adam.hpp"
#include "mdvdrp/nn/checkpoint.hpp"
#include "mdvdrp/nn/mlp.hpp"
#include "support.hpp"

using namespace mdvdrp;
using namespace mdvdrp::nn;

namespace {

struct Net {
  std::shared_ptr<ParamLayout> layout = std::make_shared<ParamLayout>();
  Mlp mlp;
  ParamVector<double> params;

  Net(const std::vector<Index>& dims, const std::vector<Activation>& acts, std::uint64_t seed) {
    mlp = Mlp::create(*layout, "net", dims, acts);
    params = ParamVector<double>(layout);
    std::mt19937_64 rng(seed);
    mlp.init(params.data(), rng);
  }
};

Matrix<double> random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Largest relative error of dL/dθ and dL/dx for L = sum(w .* y).
double mlp_gradient_error(Net& net, const Matrix<double>& x, std::mt19937_64& rng) {
  const Matrix<double> w = random_matrix(net.mlp.out(), x.cols(), rng);
  MlpCache<double> cache;
  mlp_forward(net.mlp, net.params.data(), x, &cache);
  Vector<double> grads = Vector<double>::Zero(net.params.values().size());
  const Matrix<double> dx = mlp_backward(net.mlp, net.params.data(), cache, w, grads.data());
  const auto loss = [&](const Matrix<double>& in) {
    return (mlp_forward<double>(net.mlp, net.params.data(), in, nullptr).array() * w.array()).sum();
  };
  const double h = 1e-5;
  double worst = 0.0;
  auto& theta = net.params.values();
  for (Index i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = loss(x);
    theta[i] = saved - h;
    const double down = loss(x);
    theta[i] = saved;
    worst = std::max(worst, testing::rel_error(grads[i], (up - down) / (2 * h)));
  }
  for (Index i = 0; i < x.size(); ++i) {
    Matrix<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    worst = std::max(worst, testing::rel_error(dx.data()[i], (loss(xp) - loss(xm)) / (2 * h)));
  }
  return worst;
}

}  // namespace

TEST_CASE("identity layer, relu and sigmoid") {
  Net id({3, 3}, {Activation::None}, 0);
  id.params.values().setZero();
  id.mlp.layers[0].weight(id.params.data()) = Matrix<double>::Identity(3, 3);
  Matrix<double> x(3, 1);
  x << 1.5, -2.0, 0.25;
  CHECK(mlp_forward<double>(id.mlp, id.params.data(), x, nullptr) == x);

  Matrix<double> r(2, 1);
  r << -1.0, 2.0;
  activate(r, Activation::ReLU);
  CHECK(r(0, 0) == 0.0);
  CHECK(r(1, 0) == 2.0);

  Matrix<double> s = Matrix<double>::Zero(1, 1);
  activate(s, Activation::Sigmoid);
  CHECK(s(0, 0) == 0.5);
}

TEST_CASE("linear layer gradient is the outer product and relu blocks negatives") {
  Net lin({2, 2}, {Activation::None}, 1);
  Matrix<double> x(2, 1);
  x << 3.0, -1.0;
  Matrix<double> dy(2, 1);
  dy << 0.5, 2.0;
  MlpCache<double> cache;
  mlp_forward(lin.mlp, lin.params.data(), x, &cache);
  Vector<double> g = Vector<double>::Zero(lin.params.values().size());
  mlp_backward(lin.mlp, lin.params.data(), cache, dy, g.data());
  const auto dw = Eigen::Map<const Matrix<double>>(g.data() + lin.mlp.layers[0].weight_offset, 2, 2);
  CHECK(dw.isApprox(dy * x.transpose()));

  Net relu({1, 1}, {Activation::ReLU}, 2);
  relu.params.values() << 1.0, 0.0;
  Matrix<double> neg(1, 1);
  neg << -0.7;
  MlpCache<double> c2;
  mlp_forward(relu.mlp, relu.params.data(), neg, &c2);
  Vector<double> g2 = Vector<double>::Zero(2);
  const auto dx = mlp_backward(relu.mlp, relu.params.data(), c2, Matrix<double>(Matrix<double>::Ones(1, 1)), g2.data());
  CHECK(g2.isZero());
  CHECK(dx(0, 0) == 0.0);
}

TEST_CASE("6-128-1 relu network matches finite differences") {
  std::mt19937_64 rng(3);
  Net net({6, 128, 1}, {Activation::ReLU, Activation::None}, 4);
  CHECK(mlp_gradient_error(net, random_matrix(6, 3, rng), rng) < 1e-4);
}

TEST_CASE("every activation matches finite differences") {
  std::mt19937_64 rng(5);
  for (const auto act : {Activation::None, Activation::ReLU, Activation::Tanh, Activation::Sigmoid}) {
    Net net({4, 7, 3}, {act, act}, 6);
    CHECK(mlp_gradient_error(net, random_matrix(4, 5, rng), rng) < 1e-4);
  }
}

TEST_CASE("softmax sums to one and ignores shifts") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector<double> z = 10.0 * random_matrix(1 + trial % 12, 1, rng);
    const auto p = softmax(z);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    const Vector<double> shifted = (z.array() + 123.0).matrix();
    CHECK((softmax(shifted) - p).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((log_softmax(z).array().exp().matrix() - p).cwiseAbs().maxCoeff() < 1e-12);
  }
  Vector<double> zero = Vector<double>::Zero(2);
  CHECK(softmax(zero)[0] == 0.5);
  CHECK(softmax(zero)[1] == 0.5);
}

TEST_CASE("adam examples") {
  AdamConfig c;
  c.lr = 0.1;
  SUBCASE("zero gradient leaves parameters unchanged") {
    Vector<double> w(3);
    w << 1.0, -2.0, 3.0;
    const Vector<double> before = w;
    AdamState<double> s(3);
    adam_step(w, Vector<double>(Vector<double>::Zero(3)), s, c);
    CHECK(w == before);
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    Vector<double> w = Vector<double>::Zero(2);
    Vector<double> g(2);
    g << 0.3, -40.0;
    AdamState<double> s(2);
    adam_step(w, g, s, c);
    CHECK(w[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(w[1] == doctest::Approx(0.1).epsilon(1e-6));
  }
  SUBCASE("converges on a scalar quadratic") {
    Vector<double> w = Vector<double>::Zero(1);
    AdamState<double> s(1);
    for (int i = 0; i < 200; ++i) {
      Vector<double> g(1);
      g << 2.0 * (w[0] - 3.0);
      adam_step(w, g, s, c);
    }
    CHECK(std::abs(w[0] - 3.0) < 0.1);
  }
  SUBCASE("per-parameter scale") {
    Vector<double> w = Vector<double>::Zero(2);
    Vector<double> g = Vector<double>::Ones(2);
    Vector<double> scale(2);
    scale << 1.0, 0.5;
    AdamState<double> s(2);
    adam_step(w, g, s, c, &scale);
    CHECK(w[1] == doctest::Approx(0.5 * w[0]));
  }
}

TEST_CASE("flatten, unflatten and checkpoint round trips are exact") {
  Net net({6, 9, 2}, {Activation::Tanh, Activation::None}, 8);
  const auto flat = net.params.flatten();
  ParamVector<double> other(net.layout);
  other.unflatten(flat);
  CHECK(other.values() == net.params.values());
  CHECK_THROWS_AS(other.unflatten(Vector<double>::Zero(3)), std::invalid_argument);

  Checkpoint ck{"{\"note\": \"x\"}", *net.layout, net.params.values()};
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const auto back = read_checkpoint(buf);
  CHECK(back.meta == ck.meta);
  CHECK(back.layout == ck.layout);
  CHECK(back.values == ck.values);
  CHECK(std::memcmp(back.values.data(), ck.values.data(), sizeof(double) * static_cast<std::size_t>(ck.values.size())) == 0);

  std::stringstream garbage("not a checkpoint");
  CHECK_THROWS(read_checkpoint(garbage));
}
