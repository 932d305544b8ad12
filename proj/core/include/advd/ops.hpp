#pragma once

#include <vector>

#include "advd/rng.hpp"
#include "advd/tensor.hpp"

namespace advd {

/// 2-d convolution over a [C_in,H,W] input with [C_out,C_in,kH,kW] weights
/// and a [C_out] bias. Zero padding of kH/2 x kW/2 preserves the spatial size
/// at stride 1; kernel extents must be odd. Differentiable w.r.t. input,
/// weight and bias.
template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias, int stride = 1);

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& x);

template <typename T>
TensorPtr<T> sigmoid(const TensorPtr<T>& x);

/// Inverted dropout: in training mode each element is zeroed with probability
/// drop_prob and survivors are scaled by 1/(1-drop_prob); in eval mode the
/// input passes through unchanged.
template <typename T>
TensorPtr<T> dropout(const TensorPtr<T>& x, double drop_prob, bool training,
                     Rng& rng);

/// Elementwise product; gradients flow to both operands.
template <typename T>
TensorPtr<T> hadamard(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& x, T factor);

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& x);

template <typename T>
TensorPtr<T> mean(const TensorPtr<T>& x);

/// ||pred - target||^2 / element count.
template <typename T>
TensorPtr<T> mse_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target);

/// -(label*log p + (1-label)*log(1-p)) on a single-element probability,
/// clamped to [1e-7, 1-1e-7] before the logs.
template <typename T>
TensorPtr<T> bce_loss(const TensorPtr<T>& prob, int label);

/// Smoothed, zero-anchored sparsity penalty:
/// sum over elements of (w^2 + eps)^(p/2) - eps^(p/2), with 0 < p < 1.
template <typename T>
TensorPtr<T> lp_penalty(const TensorPtr<T>& w, double p, double eps);

/// Channel-wise concatenation of [C_i,H,W] tensors.
template <typename T>
TensorPtr<T> concat_channels(const std::vector<TensorPtr<T>>& parts);

/// Clamp to [0,1]; gradient passes through where the input is in range.
template <typename T>
TensorPtr<T> clamp01(const TensorPtr<T>& x);

/// [C,H,W] -> [C] spatial mean.
template <typename T>
TensorPtr<T> global_avg_pool(const TensorPtr<T>& x);

/// y = W x + b with W [out,in], x [in], b [out].
template <typename T>
TensorPtr<T> linear(const TensorPtr<T>& x, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias);

template <typename T>
TensorPtr<T> softmax(const TensorPtr<T>& logits);

/// Single element by flat index, as a [1] tensor.
template <typename T>
TensorPtr<T> select(const TensorPtr<T>& x, std::int64_t index);

}  // namespace advd
