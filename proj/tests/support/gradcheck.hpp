#pragma once

#include <destrike/models.hpp>
#include <destrike/rng.hpp>

#include <cstddef>

namespace destrike::testing {

/// Tensor of uniform draws in [lo, hi).
template <typename T>
nn::Tensor<T> random_tensor(nn::Shape shape, Rng& rng, double lo = 0.0, double hi = 1.0) {
    nn::Tensor<T> t(shape);
    for (T& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}


/// Largest relative error between analytic and central-difference gradients
/// of a double-precision network under logit BCE, over up to `per_tensor`
/// entries of every parameter tensor.
double gradient_check(const ModelConfig& config, int batch, std::size_t per_tensor);

/// Miniature 8x16 variant of an architecture, small enough for finite differences.
ModelConfig reduced_config(ArchName arch);

}  // namespace destrike::testing
