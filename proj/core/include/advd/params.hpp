#pragma once

#include <string>
#include <vector>

#include "advd/tensor.hpp"

namespace advd {

/// A named, group-tagged model parameter. Frozen parameters (trainable ==
/// false) still carry gradients so upstream tensors receive theirs; only the
/// optimizer consults the flag.
template <typename T>
struct NamedParam {
  std::string name;
  TensorPtr<T> value;
  std::string group;
  bool trainable = true;
};

template <typename T>
using ParamSet = std::vector<NamedParam<T>>;

template <typename T>
std::int64_t param_count(const ParamSet<T>& params) {
  std::int64_t n = 0;
  for (const auto& p : params) n += p.value->size();
  return n;
}

}  // namespace advd
