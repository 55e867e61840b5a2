#include "mdvdrp/nn/params.hpp"

#include <stdexcept>

namespace mdvdrp::nn {

std::size_t ParamLayout::add(std::string name, Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative block shape");
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter block '" + name + "'");
  ParamBlock b{std::move(name), size_, rows, cols};
  size_ += b.size();
  blocks_.push_back(std::move(b));
  return blocks_.back().offset;
}

const ParamBlock* ParamLayout::find(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

template <class S>
void ParamVector<S>::unflatten(const Vector<S>& flat) {
  if (flat.size() != values_.size()) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(values_.size()) + " values, got " +
                                std::to_string(flat.size()));
  }
  values_ = flat;
}

template class ParamVector<float>;
template class ParamVector<double>;

}  // namespace mdvdrp::nn
