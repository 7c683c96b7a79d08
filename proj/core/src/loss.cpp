#include <destrike/loss.hpp>

#include <destrike/errors.hpp>
#include <destrike/models.hpp>

#include <algorithm>
#include <cmath>

namespace destrike {

double bce_loss(std::span<const float> pred, std::span<const float> target, bool from_logits) {
    if (pred.size() != target.size()) {
        throw ShapeError("bce_loss: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(target.size()) + " targets");
    }
    if (pred.empty()) throw ShapeError("bce_loss: empty input");
    double sum = 0.0;
    if (from_logits) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double z = pred[i];
            const double t = target[i];
            sum += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
        }
    } else {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double p = pred[i];
            const double t = target[i];
            const double log_p = std::max(std::log(p), -100.0);
            const double log_q = std::max(std::log1p(-p), -100.0);
            sum -= t * log_p + (1.0 - t) * log_q;
        }
    }
    return sum / static_cast<double>(pred.size());
}

double bce_loss(const nn::Tensor<float>& pred, const nn::Tensor<float>& target, bool from_logits) {
    if (!(pred.shape() == target.shape())) {
        throw ShapeError("bce_loss: shape " + pred.shape().to_string() + " vs " + target.shape().to_string());
    }
    return bce_loss(pred.values(), target.values(), from_logits);
}

template <typename T>
nn::Tensor<T> bce_logit_gradient(const nn::Tensor<T>& logits, const nn::Tensor<T>& target) {
    if (!(logits.shape() == target.shape())) {
        throw ShapeError("bce gradient: shape " + logits.shape().to_string() + " vs " +
                         target.shape().to_string());
    }
    nn::Tensor<T> grad(logits.shape());
    const T scale = T(1) / static_cast<T>(logits.size());
    const T* z = logits.data();
    const T* t = target.data();
    T* g = grad.data();
    for (std::size_t i = 0; i < grad.size(); ++i) g[i] = (sigmoid(z[i]) - t[i]) * scale;
    return grad;
}

template nn::Tensor<float> bce_logit_gradient(const nn::Tensor<float>&, const nn::Tensor<float>&);
template nn::Tensor<double> bce_logit_gradient(const nn::Tensor<double>&, const nn::Tensor<double>&);

}  // namespace destrike
