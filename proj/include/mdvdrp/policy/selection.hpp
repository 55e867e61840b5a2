#pragma once

#include <cstddef>
#include <random>

#include "mdvdrp/nn/params.hpp"

namespace mdvdrp::policy {

struct Sample {
  std::size_t index = 0;
  double log_prob = 0.0;
};

/// Argmax with the lowest index winning ties. Throws std::invalid_argument on empty input.
template <class S>
std::size_t select_greedy(const nn::Vector<S>& scores);

/// Uniform over all actions with probability epsilon, greedy otherwise.
template <class S>
std::size_t select_epsilon(const nn::Vector<S>& scores, double epsilon, std::mt19937_64& rng);

/// Draws from softmax(scores) and returns the exact log-probability of the draw.
template <class S>
Sample sample_categorical(const nn::Vector<S>& scores, std::mt19937_64& rng);

}  // namespace mdvdrp::policy
