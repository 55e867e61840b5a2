#include "mdvdrp/policy/selection.hpp"

#include <cmath>
#include <stdexcept>

#include "mdvdrp/nn/mlp.hpp"

namespace mdvdrp::policy {

template <class S>
std::size_t select_greedy(const nn::Vector<S>& scores) {
  if (scores.size() == 0) throw std::invalid_argument("select_greedy: empty score vector");
  nn::Index best = 0;
  for (nn::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

template <class S>
std::size_t select_epsilon(const nn::Vector<S>& scores, double epsilon, std::mt19937_64& rng) {
  if (scores.size() == 0) throw std::invalid_argument("select_epsilon: empty score vector");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(scores.size()) - 1);
    return pick(rng);
  }
  return select_greedy(scores);
}

template <class S>
Sample sample_categorical(const nn::Vector<S>& scores, std::mt19937_64& rng) {
  if (scores.size() == 0) throw std::invalid_argument("sample_categorical: empty score vector");
  const nn::Vector<double> logp = nn::log_softmax<double>(scores.template cast<double>());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  nn::Index pick = scores.size() - 1;
  for (nn::Index i = 0; i < scores.size(); ++i) {
    acc += std::exp(logp[i]);
    if (r < acc) {
      pick = i;
      break;
    }
  }
  return {static_cast<std::size_t>(pick), logp[pick]};
}

template std::size_t select_greedy<float>(const nn::Vector<float>&);
template std::size_t select_greedy<double>(const nn::Vector<double>&);
template std::size_t select_epsilon<float>(const nn::Vector<float>&, double, std::mt19937_64&);
template std::size_t select_epsilon<double>(const nn::Vector<double>&, double, std::mt19937_64&);
template Sample sample_categorical<float>(const nn::Vector<float>&, std::mt19937_64&);
template Sample sample_categorical<double>(const nn::Vector<double>&, std::mt19937_64&);

}  // namespace mdvdrp::policy
