#include "mdvdrp/policy/policy_net.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace mdvdrp::policy {

using nn::Activation;

std::string PolicyArch::to_json() const {
  nlohmann::json j{{"embed_hidden", embed_hidden}, {"embed", embed},   {"weight_hidden", weight_hidden},
                   {"head_hidden", head_hidden},   {"critic", critic}, {"feature_dim", kFeatureDim}};
  return j.dump();
}

PolicyArch PolicyArch::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("feature_dim", kFeatureDim) != kFeatureDim) {
    throw std::runtime_error("checkpoint feature dimension " + std::to_string(j.at("feature_dim").get<Index>()) +
                             " does not match " + std::to_string(kFeatureDim));
  }
  PolicyArch a;
  a.embed_hidden = j.at("embed_hidden").get<Index>();
  a.embed = j.at("embed").get<Index>();
  a.weight_hidden = j.at("weight_hidden").get<Index>();
  a.head_hidden = j.at("head_hidden").get<Index>();
  a.critic = j.at("critic").get<bool>();
  return a;
}

namespace {

// Indices of `rows` sorted lexicographically by row contents.
std::vector<Index> canonical_order(const FeatureRows& rows) {
  std::vector<Index> idx(static_cast<std::size_t>(rows.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double* ra = rows.data() + a * kFeatureDim;
    const double* rb = rows.data() + b * kFeatureDim;
    return std::lexicographical_compare(ra, ra + kFeatureDim, rb, rb + kFeatureDim);
  });
  return idx;
}

}  // namespace

template <class S>
PolicyNet<S>::PolicyNet(PolicyArch arch, std::uint64_t seed) : arch_(arch) {
  if (arch.embed_hidden <= 0 || arch.embed <= 0 || arch.weight_hidden <= 0 || arch.head_hidden <= 0) {
    throw std::invalid_argument("PolicyArch: layer sizes must be positive");
  }
  auto layout = std::make_shared<nn::ParamLayout>();
  const Index e = arch.embed;
  const Index ctx = arch.context_dim();
  order_embed_ = nn::Mlp::create(*layout, "order_embed", {kFeatureDim, arch.embed_hidden, e},
                                 {Activation::ReLU, Activation::None});
  order_weight_ = nn::Mlp::create(*layout, "order_weight", {e, arch.weight_hidden, 1},
                                  {Activation::Tanh, Activation::Sigmoid});
  driver_embed_ = nn::Mlp::create(*layout, "driver_embed", {kFeatureDim, arch.embed_hidden, e},
                                  {Activation::ReLU, Activation::None});
  driver_weight_ = nn::Mlp::create(*layout, "driver_weight", {e, arch.weight_hidden, 1},
                                   {Activation::Tanh, Activation::Sigmoid});
  assign_hidden_ = nn::DenseLayer::create(*layout, "assign.0", ctx + e, arch.head_hidden, Activation::ReLU);
  assign_out_ = nn::DenseLayer::create(*layout, "assign.1", arch.head_hidden, 1, Activation::None);
  repo_ = nn::Mlp::create(*layout, "repo", {ctx, arch.head_hidden, kHeadingCount},
                          {Activation::ReLU, Activation::None});
  critic_begin_ = layout->size();
  if (arch.critic) {
    critic_ = nn::Mlp::create(*layout, "critic", {ctx, arch.head_hidden, 1}, {Activation::ReLU, Activation::None});
  }
  layout_ = layout;
  params_ = nn::ParamVector<S>(layout_);

  std::mt19937_64 rng(seed);
  S* p = params_.data();
  order_embed_.init(p, rng);
  order_weight_.init(p, rng);
  driver_embed_.init(p, rng);
  driver_weight_.init(p, rng);
  assign_hidden_.init(p, rng);
  assign_out_.init(p, rng);
  repo_.init(p, rng);
  if (arch.critic) critic_.init(p, rng);
}

template <class S>
PolicyOutput<S> PolicyNet<S>::forward(const Observation& obs) const {
  const Observation* one[] = {&obs};
  return forward(one);
}

template <class S>
PolicyOutput<S> PolicyNet<S>::forward(std::span<const Observation* const> batch, PolicyCache<S>* cache) const {
  PolicyCache<S> local;
  PolicyCache<S>& c = cache ? *cache : local;
  const S* p = params_.data();
  const Index e = arch_.embed;
  const Index ctx = arch_.context_dim();
  const Index b_count = static_cast<Index>(batch.size());

  c.samples.assign(batch.size(), {});
  Index n_orders = 0, n_drivers = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Observation& obs = *batch[b];
    if (obs.drivers.rows() == 0 || obs.selected >= static_cast<std::size_t>(obs.drivers.rows())) {
      throw std::invalid_argument("observation has no selected driver row");
    }
    for (auto r : obs.actions.order_rows) {
      if (r >= static_cast<std::size_t>(obs.orders.rows())) throw std::invalid_argument("action refers to a missing order row");
    }
    auto& s = c.samples[b];
    s.order_begin = n_orders;
    s.order_count = obs.orders.rows();
    s.driver_begin = n_drivers;
    s.driver_count = obs.drivers.rows();
    n_orders += s.order_count;
    n_drivers += s.driver_count;
  }

  Matrix<S> xo(kFeatureDim, n_orders), xd(kFeatureDim, n_drivers);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Observation& obs = *batch[b];
    auto& s = c.samples[b];
    const auto oo = canonical_order(obs.orders);
    s.order_col.assign(oo.size(), 0);
    for (std::size_t k = 0; k < oo.size(); ++k) {
      const Index col = s.order_begin + static_cast<Index>(k);
      xo.col(col) = obs.orders.row(oo[k]).transpose().template cast<S>();
      s.order_col[static_cast<std::size_t>(oo[k])] = col;
    }
    const auto dd = canonical_order(obs.drivers);
    s.driver_col.assign(dd.size(), 0);
    for (std::size_t k = 0; k < dd.size(); ++k) {
      const Index col = s.driver_begin + static_cast<Index>(k);
      xd.col(col) = obs.drivers.row(dd[k]).transpose().template cast<S>();
      s.driver_col[static_cast<std::size_t>(dd[k])] = col;
    }
    s.selected_col = s.driver_col[obs.selected];
  }

  c.order_emb = nn::mlp_forward(order_embed_, p, xo, &c.order_embed);
  c.order_alpha = nn::mlp_forward(order_weight_, p, c.order_emb, &c.order_weight);
  c.driver_emb = nn::mlp_forward(driver_embed_, p, xd, &c.driver_embed);
  c.driver_alpha = nn::mlp_forward(driver_weight_, p, c.driver_emb, &c.driver_weight);

  c.context.setZero(ctx, b_count);
  for (Index b = 0; b < b_count; ++b) {
    const auto& s = c.samples[static_cast<std::size_t>(b)];
    auto po = c.context.col(b).segment(0, e);
    for (Index k = s.order_begin; k < s.order_begin + s.order_count; ++k) po += c.order_alpha(0, k) * c.order_emb.col(k);
    auto pd = c.context.col(b).segment(e, e);
    for (Index k = s.driver_begin; k < s.driver_begin + s.driver_count; ++k) {
      pd += c.driver_alpha(0, k) * c.driver_emb.col(k);
    }
    c.context.col(b).segment(2 * e, e) = c.driver_emb.col(s.selected_col);
    c.context(3 * e, b) = static_cast<S>(batch[static_cast<std::size_t>(b)]->time_feature);
  }

  PolicyOutput<S> out;
  out.scores.resize(batch.size());

  // Assign head.
  c.query_sample.clear();
  c.query_col.clear();
  c.repo_sample.clear();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Observation& obs = *batch[b];
    auto& s = c.samples[b];
    s.assign = obs.actions.is_assign();
    if (s.assign) {
      s.head_begin = static_cast<Index>(c.query_sample.size());
      s.head_count = static_cast<Index>(obs.actions.order_rows.size());
      for (auto r : obs.actions.order_rows) {
        c.query_sample.push_back(static_cast<Index>(b));
        c.query_col.push_back(s.order_col[r]);
      }
    } else {
      s.head_begin = static_cast<Index>(c.repo_sample.size());
      s.head_count = kHeadingCount;
      c.repo_sample.push_back(static_cast<Index>(b));
    }
  }

  const Index q_count = static_cast<Index>(c.query_sample.size());
  if (q_count > 0) {
    const auto w = assign_hidden_.weight(p);
    Matrix<S> pc(arch_.head_hidden, b_count);
    pc.noalias() = w.leftCols(ctx) * c.context;
    c.query_emb.resize(e, q_count);
    for (Index q = 0; q < q_count; ++q) c.query_emb.col(q) = c.order_emb.col(c.query_col[static_cast<std::size_t>(q)]);
    c.query_hidden.resize(arch_.head_hidden, q_count);
    c.query_hidden.noalias() = w.rightCols(e) * c.query_emb;
    const auto bias = assign_hidden_.bias(p);
    for (Index q = 0; q < q_count; ++q) {
      c.query_hidden.col(q) += pc.col(c.query_sample[static_cast<std::size_t>(q)]) + bias;
    }
    nn::activate(c.query_hidden, Activation::ReLU);
    Matrix<S> scores(1, q_count);
    scores.noalias() = assign_out_.weight(p) * c.query_hidden;
    scores.array() += assign_out_.bias(p)(0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& s = c.samples[b];
      if (s.assign) out.scores[b] = scores.row(0).segment(s.head_begin, s.head_count).transpose();
    }
  } else {
    c.query_emb.resize(e, 0);
    c.query_hidden.resize(arch_.head_hidden, 0);
  }
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (c.samples[b].assign && q_count == 0) out.scores[b].resize(0);
  }

  // Reposition head.
  if (!c.repo_sample.empty()) {
    Matrix<S> cr(ctx, static_cast<Index>(c.repo_sample.size()));
    for (std::size_t k = 0; k < c.repo_sample.size(); ++k) cr.col(static_cast<Index>(k)) = c.context.col(c.repo_sample[k]);
    const Matrix<S> rs = nn::mlp_forward(repo_, p, cr, &c.repo);
    for (std::size_t k = 0; k < c.repo_sample.size(); ++k) {
      out.scores[static_cast<std::size_t>(c.repo_sample[k])] = rs.col(static_cast<Index>(k));
    }
  }

  if (arch_.critic) out.values = nn::mlp_forward(critic_, p, c.context, &c.critic).row(0).transpose();
  return out;
}

template <class S>
void PolicyNet<S>::backward(const PolicyCache<S>& c, const std::vector<Vector<S>>& dscores, const Vector<S>* dvalues,
                            S* g, std::vector<InputGrads>* input_grads) const {
  if (dscores.size() != c.samples.size()) throw std::invalid_argument("backward: one score gradient per sample expected");
  const S* p = params_.data();
  const Index e = arch_.embed;
  const Index ctx = arch_.context_dim();
  const Index b_count = static_cast<Index>(c.samples.size());
  Matrix<S> dctx = Matrix<S>::Zero(ctx, b_count);
  Matrix<S> d_order_emb = Matrix<S>::Zero(e, c.order_emb.cols());
  Matrix<S> d_driver_emb = Matrix<S>::Zero(e, c.driver_emb.cols());

  for (std::size_t b = 0; b < c.samples.size(); ++b) {
    const auto& s = c.samples[b];
    if (dscores[b].size() != 0 && dscores[b].size() != s.head_count) {
      throw std::invalid_argument("backward: score gradient length does not match the action set");
    }
  }

  if (arch_.critic && dvalues != nullptr && dvalues->size() > 0) {
    if (dvalues->size() != b_count) throw std::invalid_argument("backward: one value gradient per sample expected");
    const Matrix<S> dv = dvalues->transpose();
    dctx += nn::mlp_backward(critic_, p, c.critic, dv, g);
  }

  if (!c.repo_sample.empty()) {
    Matrix<S> dr = Matrix<S>::Zero(kHeadingCount, static_cast<Index>(c.repo_sample.size()));
    bool any = false;
    for (std::size_t k = 0; k < c.repo_sample.size(); ++k) {
      const auto& d = dscores[static_cast<std::size_t>(c.repo_sample[k])];
      if (d.size() != 0) {
        dr.col(static_cast<Index>(k)) = d;
        any = true;
      }
    }
    if (any) {
      const Matrix<S> dcr = nn::mlp_backward(repo_, p, c.repo, dr, g);
      for (std::size_t k = 0; k < c.repo_sample.size(); ++k) dctx.col(c.repo_sample[k]) += dcr.col(static_cast<Index>(k));
    }
  }

  const Index q_count = static_cast<Index>(c.query_sample.size());
  if (q_count > 0) {
    Matrix<S> dy = Matrix<S>::Zero(1, q_count);
    for (const auto& s : c.samples) {
      const auto& d = dscores[static_cast<std::size_t>(&s - c.samples.data())];
      if (s.assign && d.size() != 0) dy.row(0).segment(s.head_begin, s.head_count) = d.transpose();
    }
    assign_out_.weight(g).noalias() += dy * c.query_hidden.transpose();
    assign_out_.bias(g)(0) += dy.sum();
    Matrix<S> dz(arch_.head_hidden, q_count);
    dz.noalias() = assign_out_.weight(p).transpose() * dy;
    nn::activation_backward(c.query_hidden, Activation::ReLU, dz);
    assign_hidden_.bias(g) += dz.rowwise().sum();
    Matrix<S> dpc = Matrix<S>::Zero(arch_.head_hidden, b_count);
    for (Index q = 0; q < q_count; ++q) dpc.col(c.query_sample[static_cast<std::size_t>(q)]) += dz.col(q);
    auto gw = assign_hidden_.weight(g);
    const auto w = assign_hidden_.weight(p);
    gw.leftCols(ctx).noalias() += dpc * c.context.transpose();
    gw.rightCols(e).noalias() += dz * c.query_emb.transpose();
    dctx.noalias() += w.leftCols(ctx).transpose() * dpc;
    Matrix<S> dq(e, q_count);
    dq.noalias() = w.rightCols(e).transpose() * dz;
    for (Index q = 0; q < q_count; ++q) d_order_emb.col(c.query_col[static_cast<std::size_t>(q)]) += dq.col(q);
  }

  Matrix<S> d_order_alpha = Matrix<S>::Zero(1, c.order_emb.cols());
  Matrix<S> d_driver_alpha = Matrix<S>::Zero(1, c.driver_emb.cols());
  for (Index b = 0; b < b_count; ++b) {
    const auto& s = c.samples[static_cast<std::size_t>(b)];
    const auto dpo = dctx.col(b).segment(0, e);
    for (Index k = s.order_begin; k < s.order_begin + s.order_count; ++k) {
      d_order_emb.col(k) += c.order_alpha(0, k) * dpo;
      d_order_alpha(0, k) = dpo.dot(c.order_emb.col(k));
    }
    const auto dpd = dctx.col(b).segment(e, e);
    for (Index k = s.driver_begin; k < s.driver_begin + s.driver_count; ++k) {
      d_driver_emb.col(k) += c.driver_alpha(0, k) * dpd;
      d_driver_alpha(0, k) = dpd.dot(c.driver_emb.col(k));
    }
    d_driver_emb.col(s.selected_col) += dctx.col(b).segment(2 * e, e);
  }

  const bool need_dx = input_grads != nullptr;
  d_order_emb += nn::mlp_backward(order_weight_, p, c.order_weight, d_order_alpha, g);
  const Matrix<S> dxo = nn::mlp_backward(order_embed_, p, c.order_embed, d_order_emb, g, need_dx);
  d_driver_emb += nn::mlp_backward(driver_weight_, p, c.driver_weight, d_driver_alpha, g);
  const Matrix<S> dxd = nn::mlp_backward(driver_embed_, p, c.driver_embed, d_driver_emb, g, need_dx);

  if (need_dx) {
    input_grads->assign(c.samples.size(), {});
    for (std::size_t b = 0; b < c.samples.size(); ++b) {
      const auto& s = c.samples[b];
      auto& ig = (*input_grads)[b];
      ig.orders.resize(s.order_count, kFeatureDim);
      for (std::size_t r = 0; r < s.order_col.size(); ++r) {
        ig.orders.row(static_cast<Index>(r)) = dxo.col(s.order_col[r]).transpose().template cast<double>();
      }
      ig.drivers.resize(s.driver_count, kFeatureDim);
      for (std::size_t r = 0; r < s.driver_col.size(); ++r) {
        ig.drivers.row(static_cast<Index>(r)) = dxd.col(s.driver_col[r]).transpose().template cast<double>();
      }
    }
  }
}

template <class S>
Vector<S> PolicyNet<S>::lr_scale(double trunk, double critic) const {
  Vector<S> v = Vector<S>::Constant(num_params(), static_cast<S>(trunk));
  v.tail(num_params() - static_cast<Index>(critic_begin_)).setConstant(static_cast<S>(critic));
  return v;
}

template <class S>
nn::Checkpoint PolicyNet<S>::to_checkpoint() const {
  nn::Checkpoint ck;
  ck.meta = arch_.to_json();
  ck.layout = *layout_;
  ck.values = params_.values().template cast<double>();
  return ck;
}

template <class S>
PolicyNet<S> PolicyNet<S>::from_checkpoint(const nn::Checkpoint& ckpt) {
  PolicyNet<S> net(PolicyArch::from_json(ckpt.meta));
  if (!(ckpt.layout == *net.layout_)) throw std::runtime_error("checkpoint layout does not match the architecture");
  net.params_.unflatten(ckpt.values.template cast<S>());
  return net;
}

template class PolicyNet<float>;
template class PolicyNet<double>;

}  // namespace mdvdrp::policy
