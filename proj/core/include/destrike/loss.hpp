#pragma once

#include <destrike/nn/tensor.hpp>

#include <span>

namespace destrike {

/// Mean binary cross entropy. On the probability path log terms are clamped
/// at -100 so saturated predictions stay finite; on the logits path the
/// sigmoid is folded into a stable log-sum-exp form.
double bce_loss(std::span<const float> pred, std::span<const float> target, bool from_logits);
double bce_loss(const nn::Tensor<float>& pred, const nn::Tensor<float>& target, bool from_logits);

/// Gradient of the mean BCE with respect to the logits: (sigmoid(z) - t) / N.
/// Identical for both heads, since a sigmoid head composed with the
/// probability-path loss has the same derivative.
template <typename T>
nn::Tensor<T> bce_logit_gradient(const nn::Tensor<T>& logits, const nn::Tensor<T>& target);

}  // namespace destrike
