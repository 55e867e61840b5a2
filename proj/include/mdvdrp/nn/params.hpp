#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mdvdrp::nn {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// A named, column-major matrix stored at `offset` inside a flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  Index rows = 0;
  Index cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Stable index map from named blocks to ranges of a flat vector.
class ParamLayout {
 public:
  /// Appends a block and returns its offset.
  std::size_t add(std::string name, Index rows, Index cols);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock* find(const std::string& name) const;
  std::size_t size() const { return size_; }

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t size_ = 0;
};

/// Flat parameter storage bound to a layout.
template <class S>
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::shared_ptr<const ParamLayout> layout)
      : layout_(std::move(layout)), values_(Vector<S>::Zero(static_cast<Index>(layout_->size()))) {}

  const ParamLayout& layout() const { return *layout_; }
  const std::shared_ptr<const ParamLayout>& layout_ptr() const { return layout_; }

  Vector<S>& values() { return values_; }
  const Vector<S>& values() const { return values_; }
  S* data() { return values_.data(); }
  const S* data() const { return values_.data(); }

  Eigen::Map<Matrix<S>> block(const ParamBlock& b) {
    return Eigen::Map<Matrix<S>>(values_.data() + b.offset, b.rows, b.cols);
  }
  Eigen::Map<const Matrix<S>> block(const ParamBlock& b) const {
    return Eigen::Map<const Matrix<S>>(values_.data() + b.offset, b.rows, b.cols);
  }

  Vector<S> flatten() const { return values_; }
  /// Throws std::invalid_argument on a size mismatch.
  void unflatten(const Vector<S>& flat);

 private:
  std::shared_ptr<const ParamLayout> layout_;
  Vector<S> values_;
};

}  // namespace mdvdrp::nn
