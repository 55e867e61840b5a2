#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mdvdrp/features/observation.hpp"
#include "mdvdrp/nn/checkpoint.hpp"
#include "mdvdrp/nn/mlp.hpp"
#include "mdvdrp/nn/params.hpp"

namespace mdvdrp::policy {

using nn::Index;
using nn::Matrix;
using nn::Vector;

struct PolicyArch {
  Index embed_hidden = 128;
  Index embed = 128;
  Index weight_hidden = 128;
  Index head_hidden = 64;
  bool critic = false;

  /// [pooled orders | pooled drivers | selected driver | t]
  Index context_dim() const { return 3 * embed + 1; }

  std::string to_json() const;
  static PolicyArch from_json(const std::string& text);
  friend bool operator==(const PolicyArch&, const PolicyArch&) = default;
};

/// Per-sample bookkeeping of a batched forward pass.
struct SampleSlots {
  Index order_begin = 0;
  Index order_count = 0;
  Index driver_begin = 0;
  Index driver_count = 0;
  Index selected_col = 0;
  std::vector<Index> order_col;   // observation row -> column of the stacked order matrix
  std::vector<Index> driver_col;  // observation row -> column of the stacked driver matrix
  bool assign = false;
  Index head_begin = 0;  // first assign query or repo column of this sample
  Index head_count = 0;
};

template <class S>
struct PolicyCache {
  std::vector<SampleSlots> samples;
  nn::MlpCache<S> order_embed, order_weight, driver_embed, driver_weight;
  Matrix<S> order_emb, order_alpha, driver_emb, driver_alpha;
  Matrix<S> context;
  // Assign head: one query per legal order.
  std::vector<Index> query_sample;
  std::vector<Index> query_col;
  Matrix<S> query_emb;
  Matrix<S> query_hidden;
  // Reposition head.
  std::vector<Index> repo_sample;
  nn::MlpCache<S> repo;
  nn::MlpCache<S> critic;
};

template <class S>
struct PolicyOutput {
  std::vector<Vector<S>> scores;  // one entry per legal action, in action-set order
  Vector<S> values;               // empty without a critic
};

/// Gradient of a scalar loss with respect to the feature rows of one observation.
struct InputGrads {
  FeatureRows orders;
  FeatureRows drivers;
};

/// Attention-pooling dispatch network. Entities are embedded independently, weighted by a
/// sigmoid gate and summed into a global context; the assign head scores each legal order from
/// [context | order embedding], the reposition head maps the context to nine scores, and the
/// optional critic maps the context to a state value.
///
/// Entities are processed in a canonical (lexicographic) order, so the outputs do not depend on
/// the row order of the observation.
template <class S>
class PolicyNet {
 public:
  explicit PolicyNet(PolicyArch arch = {}, std::uint64_t seed = 0);

  const PolicyArch& arch() const { return arch_; }
  nn::ParamVector<S>& params() { return params_; }
  const nn::ParamVector<S>& params() const { return params_; }
  Index num_params() const { return params_.values().size(); }

  PolicyOutput<S> forward(std::span<const Observation* const> batch, PolicyCache<S>* cache = nullptr) const;
  PolicyOutput<S> forward(const Observation& obs) const;

  /// Accumulates dL/dθ into `grads` (length num_params()). `dvalues` may be null. When
  /// `input_grads` is given it receives one entry per sample.
  void backward(const PolicyCache<S>& cache, const std::vector<Vector<S>>& dscores, const Vector<S>* dvalues,
                S* grads, std::vector<InputGrads>* input_grads = nullptr) const;

  /// Per-parameter learning-rate multipliers: `critic` for critic blocks, `trunk` elsewhere.
  Vector<S> lr_scale(double trunk, double critic) const;

  nn::Checkpoint to_checkpoint() const;
  /// Throws std::runtime_error on an incompatible checkpoint.
  static PolicyNet from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  PolicyArch arch_;
  std::shared_ptr<nn::ParamLayout> layout_;
  nn::ParamVector<S> params_;
  nn::Mlp order_embed_, order_weight_, driver_embed_, driver_weight_;
  nn::DenseLayer assign_hidden_, assign_out_;
  nn::Mlp repo_;
  nn::Mlp critic_;
  std::size_t critic_begin_ = 0;
};

extern template class PolicyNet<float>;
extern template class PolicyNet<double>;

}  // namespace mdvdrp::policy
