#include "advd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace advd {

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_same_shape(const std::vector<int>& a, const std::vector<int>& b,
                      const char* op_name) {
  if (a != b) {
    throw ShapeError(std::string(op_name) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> s, std::vector<T> d, bool rg)
    : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
  if (static_cast<std::int64_t>(data.size()) != shape_size(shape)) {
    throw ShapeError("element count " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
}

template <typename T>
TensorPtr<T> Tensor<T>::zeros(std::vector<int> shape, bool requires_grad) {
  auto n = static_cast<std::size_t>(shape_size(shape));
  return std::make_shared<Tensor<T>>(std::move(shape), std::vector<T>(n, T(0)),
                                     requires_grad);
}

template <typename T>
TensorPtr<T> Tensor<T>::full(std::vector<int> shape, T value,
                             bool requires_grad) {
  auto n = static_cast<std::size_t>(shape_size(shape));
  return std::make_shared<Tensor<T>>(std::move(shape),
                                     std::vector<T>(n, value), requires_grad);
}

template <typename T>
TensorPtr<T> Tensor<T>::from(std::vector<int> shape, std::vector<T> values,
                             bool requires_grad) {
  return std::make_shared<Tensor<T>>(std::move(shape), std::move(values),
                                     requires_grad);
}

template <typename T>
TensorPtr<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

template <typename T>
TensorPtr<T> Tensor<T>::uniform(std::vector<int> shape, T lo, T hi, Rng& rng,
                                bool requires_grad) {
  auto n = static_cast<std::size_t>(shape_size(shape));
  std::vector<T> values(n);
  for (auto& v : values)
    v = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
  return std::make_shared<Tensor<T>>(std::move(shape), std::move(values),
                                     requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (data.size() != 1) {
    throw ShapeError("item() requires a single-element tensor, got " +
                     shape_str(shape));
  }
  return data[0];
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

template <typename T>
void Tensor<T>::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), T(0));
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(grad.begin(), grad.end(), T(0));
}

template <typename T>
void Tensor<T>::backward(T seed) {
  if (data.size() != 1) {
    throw ShapeError("backward() requires a single-element output, got " +
                     shape_str(shape));
  }
  if (!requires_grad) return;

  // Post-order DFS (iterative; graphs can reach thousands of nodes).
  std::vector<Tensor<T>*> order;
  std::unordered_set<Tensor<T>*> seen;
  std::vector<std::pair<Tensor<T>*, std::size_t>> stack;
  stack.emplace_back(this, 0);
  seen.insert(this);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Tensor<T>* p = node->parents[next].get();
      ++next;
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Tensor<T>* node : order) node->ensure_grad();
  grad[0] += seed;

  // Reverse topological order: each node's grad is complete before it is
  // pushed into its parents.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor<T>* node = *it;
    if (node->backward_op) node->backward_op(*node);
  }
}

template <typename T>
TensorPtr<T> Tensor<T>::detached() const {
  return from(shape, data, false);
}

template struct Tensor<float>;
template struct Tensor<double>;

}  // namespace advd
