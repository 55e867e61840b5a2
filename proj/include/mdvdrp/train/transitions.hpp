#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mdvdrp/sim/engine.hpp"

namespace mdvdrp::train {

enum class Perspective { DriverCentric, SystemCentric };

Perspective parse_perspective(const std::string& s);
std::string perspective_name(Perspective p);

/// One decision point of an episode.
struct DecisionRecord {
  SimTime time = 0.0;
  DriverId driver = 0;
  ObservationPtr obs;
  std::size_t action = 0;
  double reward = 0.0;
  double log_prob = 0.0;  // behaviour log-probability (policy-gradient runs)
  double value = 0.0;     // critic estimate at `obs` (policy-gradient runs)
};

/// (s, a, r, s') with continuous-time gap. For compound n-step transitions `reward` is the
/// discounted reward sum of the window and `dt` the gap to the bootstrap state.
struct Transition {
  ObservationPtr obs;
  std::size_t action = 0;
  double reward = 0.0;
  ObservationPtr next_obs;  // null when done
  double dt = 0.0;
  bool done = false;
  Perspective perspective = Perspective::SystemCentric;
  SimTime time = 0.0;
  DriverId driver = 0;
};

/// One stream of consecutive transitions (a single driver, or the whole system).
struct TransitionStream {
  DriverId driver = -1;  // -1 for the system stream
  std::vector<Transition> steps;
};

/// Links each driver's successive decisions; the last decision of every driver is terminal.
/// Streams are ordered by driver id.
std::vector<TransitionStream> build_driver_centric(const std::vector<DecisionRecord>& log);

/// Links globally consecutive decisions; the last decision is terminal.
TransitionStream build_system_centric(const std::vector<DecisionRecord>& log);

std::vector<TransitionStream> build_streams(const std::vector<DecisionRecord>& log, Perspective perspective);

/// Compound transition starting at `steps[k]` spanning at most `n` steps, truncated at a
/// terminal step.
Transition compound(const std::vector<Transition>& steps, std::size_t k, std::size_t n, double gamma);

/// Assembles n-step transitions while an episode is running. A transition is released once its
/// bootstrap decision is known; finish() flushes the remaining ones as terminal.
class TransitionAssembler {
 public:
  TransitionAssembler(Perspective perspective, std::size_t n, double gamma);

  void record(const DecisionRecord& d);
  void finish();
  /// Moves out every transition released so far.
  std::vector<Transition> take();

 private:
  void emit(std::deque<DecisionRecord>& pending, bool terminal);

  Perspective perspective_;
  std::size_t n_;
  double gamma_;
  std::map<DriverId, std::deque<DecisionRecord>> pending_;
  std::vector<Transition> ready_;
};

/// Fixed-capacity FIFO store with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 20000);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Uniform sampling with replacement. Throws if the buffer is empty.
  std::vector<const Transition*> sample(std::size_t count, std::mt19937_64& rng) const;
  /// Oldest first.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // index of the oldest item once full
};

}  // namespace mdvdrp::train
