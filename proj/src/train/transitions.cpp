#include "mdvdrp/train/transitions.hpp"

#include <cmath>
#include <stdexcept>

#include "mdvdrp/train/estimators.hpp"

namespace mdvdrp::train {

Perspective parse_perspective(const std::string& s) {
  if (s == "driver") return Perspective::DriverCentric;
  if (s == "system") return Perspective::SystemCentric;
  throw std::invalid_argument("unknown perspective '" + s + "' (expected driver or system)");
}

std::string perspective_name(Perspective p) { return p == Perspective::DriverCentric ? "driver" : "system"; }

namespace {

std::vector<Transition> link(const std::vector<const DecisionRecord*>& ds, Perspective p) {
  std::vector<Transition> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& d = *ds[i];
    Transition t;
    t.obs = d.obs;
    t.action = d.action;
    t.reward = d.reward;
    t.perspective = p;
    t.time = d.time;
    t.driver = d.driver;
    if (i + 1 < ds.size()) {
      t.next_obs = ds[i + 1]->obs;
      t.dt = ds[i + 1]->time - d.time;
    } else {
      t.done = true;
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<TransitionStream> build_driver_centric(const std::vector<DecisionRecord>& log) {
  std::map<DriverId, std::vector<const DecisionRecord*>> by_driver;
  for (const auto& d : log) by_driver[d.driver].push_back(&d);
  std::vector<TransitionStream> streams;
  for (const auto& [id, ds] : by_driver) streams.push_back({id, link(ds, Perspective::DriverCentric)});
  return streams;
}

TransitionStream build_system_centric(const std::vector<DecisionRecord>& log) {
  std::vector<const DecisionRecord*> ds;
  ds.reserve(log.size());
  for (const auto& d : log) ds.push_back(&d);
  return {-1, link(ds, Perspective::SystemCentric)};
}

std::vector<TransitionStream> build_streams(const std::vector<DecisionRecord>& log, Perspective perspective) {
  if (perspective == Perspective::DriverCentric) return build_driver_centric(log);
  return {build_system_centric(log)};
}

Transition compound(const std::vector<Transition>& steps, std::size_t k, std::size_t n, double gamma) {
  if (k >= steps.size() || n == 0) throw std::invalid_argument("compound: bad window");
  Transition t = steps[k];
  double elapsed = 0.0;
  double reward = 0.0;
  std::size_t j = k;
  for (std::size_t m = 0; m < n && j < steps.size(); ++m, ++j) {
    reward += discount(gamma, elapsed) * steps[j].reward;
    if (steps[j].done) {
      t.reward = reward;
      t.next_obs = nullptr;
      t.dt = elapsed;
      t.done = true;
      return t;
    }
    elapsed += steps[j].dt;
  }
  t.reward = reward;
  t.next_obs = steps[j - 1].next_obs;
  t.dt = elapsed;
  t.done = false;
  return t;
}

TransitionAssembler::TransitionAssembler(Perspective perspective, std::size_t n, double gamma)
    : perspective_(perspective), n_(n), gamma_(gamma) {
  if (n == 0) throw std::invalid_argument("TransitionAssembler: n must be >= 1");
}

void TransitionAssembler::record(const DecisionRecord& d) {
  const DriverId key = perspective_ == Perspective::DriverCentric ? d.driver : -1;
  auto& pending = pending_[key];
  pending.push_back(d);
  while (pending.size() > n_) emit(pending, false);
}

void TransitionAssembler::finish() {
  for (auto& [key, pending] : pending_) {
    while (!pending.empty()) emit(pending, true);
  }
  pending_.clear();
}

void TransitionAssembler::emit(std::deque<DecisionRecord>& pending, bool terminal) {
  // Window = pending[0 .. m), bootstrap = pending[m] unless terminal.
  const std::size_t m = terminal ? pending.size() : n_;
  const auto& first = pending.front();
  Transition t;
  t.obs = first.obs;
  t.action = first.action;
  t.perspective = perspective_;
  t.time = first.time;
  t.driver = first.driver;
  for (std::size_t i = 0; i < m; ++i) t.reward += discount(gamma_, pending[i].time - first.time) * pending[i].reward;
  if (terminal) {
    t.done = true;
    t.dt = pending[m - 1].time - first.time;
  } else {
    t.next_obs = pending[m].obs;
    t.dt = pending[m].time - first.time;
  }
  ready_.push_back(std::move(t));
  pending.pop_front();
}

std::vector<Transition> TransitionAssembler::take() {
  std::vector<Transition> out;
  out.swap(ready_);
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  if (items_.empty()) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out(count);
  for (auto& p : out) p = &items_[pick(rng)];
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
  return items_[(head_ + i) % items_.size()];
}

}  // namespace mdvdrp::train
