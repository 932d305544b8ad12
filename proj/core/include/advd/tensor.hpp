#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "advd/errors.hpp"
#include "advd/rng.hpp"

namespace advd {

template <typename T>
struct Tensor;

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

/// Dense n-d array of real values plus a node of the reverse-mode tape.
///
/// Values are treated as immutable once produced by an op; only leaf
/// parameters are mutated, and only by their owning optimizer. Gradient
/// buffers start at zero and are accumulated additively during backward().
template <typename T>
struct Tensor : std::enable_shared_from_this<Tensor<T>> {
  using Scalar = T;

  std::vector<int> shape;
  std::vector<T> data;
  bool requires_grad = false;
  std::vector<T> grad;  // empty until touched by backward() / ensure_grad()

  // Tape edges: inputs of the op that produced this tensor, and the pull
  // function moving grad of this node into the inputs' grads.
  std::vector<TensorPtr<T>> parents;
  std::function<void(Tensor<T>&)> backward_op;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<T> d, bool rg);

  static TensorPtr<T> zeros(std::vector<int> shape, bool requires_grad = false);
  static TensorPtr<T> full(std::vector<int> shape, T value,
                           bool requires_grad = false);
  static TensorPtr<T> from(std::vector<int> shape, std::vector<T> values,
                           bool requires_grad = false);
  static TensorPtr<T> scalar(T value, bool requires_grad = false);
  /// Uniform fill in [lo, hi).
  static TensorPtr<T> uniform(std::vector<int> shape, T lo, T hi, Rng& rng,
                              bool requires_grad = false);

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  /// Value of a single-element tensor.
  T item() const;

  bool all_finite() const;

  void ensure_grad();
  void zero_grad();

  /// Reverse-mode sweep from this node, which must be a single-element
  /// tensor. Gradients accumulate into every reachable tensor with
  /// requires_grad set.
  void backward(T seed = T(1));

  /// Same values, detached from the tape, no gradient tracking.
  TensorPtr<T> detached() const;
};

/// Product of extents; empty shape denotes a scalar of size 1.
std::int64_t shape_size(const std::vector<int>& shape);

std::string shape_str(const std::vector<int>& shape);

void check_same_shape(const std::vector<int>& a, const std::vector<int>& b,
                      const char* op_name);

extern template struct Tensor<float>;
extern template struct Tensor<double>;

}  // namespace advd
