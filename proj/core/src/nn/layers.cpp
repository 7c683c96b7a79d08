#include <destrike/nn/layers.hpp>

#include <destrike/errors.hpp>

#include <Eigen/Core>

#include <cmath>

namespace destrike::nn {

// ---------------------------------------------------------------------------
// BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    const auto c = static_cast<std::size_t>(channels);
    gamma_.value.assign(c, T(1));
    gamma_.grad.assign(c, T(0));
    beta_.value.assign(c, T(0));
    beta_.grad.assign(c, T(0));
    running_mean_.value.assign(c, T(0));
    running_var_.value.assign(c, T(1));
}

template <typename T>
Shape BatchNorm2d<T>::output_shape(const Shape& in) const {
    if (in.c != channels_) {
        throw ShapeError(this->name_ + ": expected " + std::to_string(channels_) + " channels, got " +
                         in.to_string());
    }
    return in;
}

namespace {

template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

template <typename T>
ConstArrayMap<T> plane_of(const Tensor<T>& t, int n, int c) {
    return ConstArrayMap<T>(t.channel(n, c), static_cast<Eigen::Index>(t.shape().plane()));
}

template <typename T>
ArrayMap<T> plane_of(Tensor<T>& t, int n, int c) {
    return ArrayMap<T>(t.channel(n, c), static_cast<Eigen::Index>(t.shape().plane()));
}

}  // namespace

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
    const Shape& s = output_shape(x.shape());
    auto y = Tensor<T>::uninitialized(s);

    if (mode == Mode::eval) {
        for (int c = 0; c < s.c; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            const double scale =
                gamma_.value[ci] / std::sqrt(static_cast<double>(running_var_.value[ci]) + eps_);
            const double shift = beta_.value[ci] - scale * running_mean_.value[ci];
            for (int n = 0; n < s.n; ++n) {
                plane_of(y, n, c) = plane_of(x, n, c) * static_cast<T>(scale) + static_cast<T>(shift);
            }
        }
        return y;
    }

    const double count = static_cast<double>(s.n) * static_cast<double>(s.plane());
    normalized_ = Tensor<T>::uninitialized(s);
    inv_std_.assign(static_cast<std::size_t>(s.c), 0.0);
    for (int c = 0; c < s.c; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const auto v = plane_of(x, n, c).template cast<double>();
            sum += v.sum();
            sum_sq += v.square().sum();
        }
        const double mean = sum / count;
        const double var = std::max(sum_sq / count - mean * mean, 0.0);
        const double inv_std = 1.0 / std::sqrt(var + eps_);
        inv_std_[ci] = inv_std;

        const T g = gamma_.value[ci];
        const T b = beta_.value[ci];
        for (int n = 0; n < s.n; ++n) {
            auto xhat = plane_of(normalized_, n, c);
            xhat = (plane_of(x, n, c) - static_cast<T>(mean)) * static_cast<T>(inv_std);
            plane_of(y, n, c) = xhat * g + b;
        }

        const double unbiased = count > 1.0 ? var * count / (count - 1.0) : var;
        running_mean_.value[ci] =
            static_cast<T>((1.0 - momentum_) * running_mean_.value[ci] + momentum_ * mean);
        running_var_.value[ci] =
            static_cast<T>((1.0 - momentum_) * running_var_.value[ci] + momentum_ * unbiased);
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& grad) {
    const Shape& s = normalized_.shape();
    if (!(grad.shape() == s)) throw ShapeError(this->name_ + ": gradient shape mismatch");
    auto dx = Tensor<T>::uninitialized(s);
    const double count = static_cast<double>(s.n) * static_cast<double>(s.plane());

    for (int c = 0; c < s.c; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const auto dy = plane_of(grad, n, c).template cast<double>();
            sum_dy += dy.sum();
            sum_dy_xhat += (dy * plane_of(normalized_, n, c).template cast<double>()).sum();
        }
        gamma_.grad[ci] += static_cast<T>(sum_dy_xhat);
        beta_.grad[ci] += static_cast<T>(sum_dy);

        // dx = k * (count * dy - sum_dy - xhat * sum_dy_xhat)
        const double k = gamma_.value[ci] * inv_std_[ci] / count;
        const T a = static_cast<T>(k * count);
        const T b = static_cast<T>(-k * sum_dy);
        const T m = static_cast<T>(-k * sum_dy_xhat);
        for (int n = 0; n < s.n; ++n) {
            plane_of(dx, n, c) = plane_of(grad, n, c) * a + b + plane_of(normalized_, n, c) * m;
        }
    }
    return dx;
}

template <typename T>
void BatchNorm2d<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

template <typename T>
void BatchNorm2d<T>::collect_buffers(std::vector<Parameter<T>*>& out) {
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
}

template <typename T>
void BatchNorm2d<T>::initialize(Rng&) {
    std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
    std::fill(beta_.value.begin(), beta_.value.end(), T(0));
    std::fill(running_mean_.value.begin(), running_mean_.value.end(), T(0));
    std::fill(running_var_.value.begin(), running_var_.value.end(), T(1));
}

template <typename T>
void BatchNorm2d<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    gamma_.name = prefix + ".weight";
    beta_.name = prefix + ".bias";
    running_mean_.name = prefix + ".running_mean";
    running_var_.name = prefix + ".running_var";
}

// ---------------------------------------------------------------------------
// ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> y = x;
    for (T& v : y.values()) v = v > T(0) ? v : T(0);
    if (mode == Mode::train) output_ = y;
    return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& grad) {
    if (!(grad.shape() == output_.shape())) throw ShapeError("relu: gradient shape mismatch");
    Tensor<T> dx = grad;
    auto g = dx.values();
    auto y = output_.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(y[i] > T(0))) g[i] = T(0);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Sequential

template <typename T>
Shape Sequential<T>::output_shape(const Shape& in) const {
    Shape s = in;
    for (const auto& l : layers_) s = l->output_shape(s);
    return s;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
    if (layers_.empty()) return x;
    Tensor<T> y = layers_.front()->forward(x, mode);
    for (std::size_t i = 1; i < layers_.size(); ++i) y = layers_[i]->forward(y, mode);
    return y;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad) {
    if (layers_.empty()) return grad;
    Tensor<T> g = layers_.back()->backward(grad);
    for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
    return g;
}

template <typename T>
void Sequential<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers_) l->collect_parameters(out);
}

template <typename T>
void Sequential<T>::collect_buffers(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers_) l->collect_buffers(out);
}

template <typename T>
void Sequential<T>::initialize(Rng& rng) {
    for (auto& l : layers_) l->initialize(rng);
}

template <typename T>
void Sequential<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->set_name(prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i));
    }
}

// ---------------------------------------------------------------------------
// DenseBlock

template <typename T>
DenseBlock<T>::DenseBlock(int in_channels, int growth, int layers, bool keep_input,
                          double bn_momentum, double bn_eps)
    : in_channels_(in_channels), growth_(growth), keep_input_(keep_input) {
    if (layers < 1 || growth < 1) throw ShapeError("dense block needs at least one layer and growth >= 1");
    for (int i = 0; i < layers; ++i) {
        const int cin = in_channels + i * growth;
        auto layer = std::make_unique<Sequential<T>>();
        layer->add(std::make_unique<BatchNorm2d<T>>(cin, bn_momentum, bn_eps));
        layer->add(std::make_unique<ReLU<T>>());
        layer->add(std::make_unique<Conv2d<T>>(cin, growth, 3, 1, 1));
        layers_.push_back(std::move(layer));
    }
}

template <typename T>
Shape DenseBlock<T>::output_shape(const Shape& in) const {
    if (in.c != in_channels_) {
        throw ShapeError(this->name_ + ": expected " + std::to_string(in_channels_) +
                         " channels, got " + in.to_string());
    }
    return {in.n, out_channels(), in.h, in.w};
}

template <typename T>
Tensor<T> DenseBlock<T>::forward(const Tensor<T>& x, Mode mode) {
    const Shape s = output_shape(x.shape());
    const int total = in_channels_ + growth_ * static_cast<int>(layers_.size());
    auto features = Tensor<T>::uninitialized({s.n, total, s.h, s.w});
    copy_channels(x, 0, features, 0, in_channels_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const int width = in_channels_ + static_cast<int>(i) * growth_;
        auto input = Tensor<T>::uninitialized({s.n, width, s.h, s.w});
        copy_channels(features, 0, input, 0, width);
        const Tensor<T> fresh = layers_[i]->forward(input, mode);
        copy_channels(fresh, 0, features, width, growth_);
    }
    features_shape_ = features.shape();
    if (keep_input_) return features;
    auto out = Tensor<T>::uninitialized(s);
    copy_channels(features, in_channels_, out, 0, out_channels());
    return out;
}

template <typename T>
Tensor<T> DenseBlock<T>::backward(const Tensor<T>& grad) {
    const Shape& fs = features_shape_;
    if (grad.shape().n != fs.n || grad.shape().c != out_channels() || grad.shape().h != fs.h ||
        grad.shape().w != fs.w) {
        throw ShapeError(this->name_ + ": gradient shape mismatch");
    }
    Tensor<T> g(fs);
    copy_channels(grad, 0, g, keep_input_ ? 0 : in_channels_, out_channels());
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const int width = in_channels_ + static_cast<int>(i) * growth_;
        auto g_fresh = Tensor<T>::uninitialized({fs.n, growth_, fs.h, fs.w});
        copy_channels(g, width, g_fresh, 0, growth_);
        const Tensor<T> g_input = layers_[i]->backward(g_fresh);
        add_channels(g_input, 0, g, 0, width);
    }
    auto dx = Tensor<T>::uninitialized({fs.n, in_channels_, fs.h, fs.w});
    copy_channels(g, 0, dx, 0, in_channels_);
    return dx;
}

template <typename T>
void DenseBlock<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers_) l->collect_parameters(out);
}

template <typename T>
void DenseBlock<T>::collect_buffers(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers_) l->collect_buffers(out);
}

template <typename T>
void DenseBlock<T>::initialize(Rng& rng) {
    for (auto& l : layers_) l->initialize(rng);
}

template <typename T>
void DenseBlock<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->set_name(prefix + ".layer" + std::to_string(i));
}

// ---------------------------------------------------------------------------
// DenseUNet

template <typename T>
DenseUNet<T>::DenseUNet(int stem_channels, int growth, int layers, double bn_momentum, double bn_eps)
    : skip_channels_(stem_channels + layers * growth),
      bottleneck_channels_(layers * growth),
      stem_(1, stem_channels, 3, 1, 1),
      down_(stem_channels, growth, layers, true, bn_momentum, bn_eps),
      bottleneck_(skip_channels_, growth, layers, false, bn_momentum, bn_eps),
      transition_up_(bottleneck_channels_, bottleneck_channels_, 3, 2, 1, 1),
      up_(bottleneck_channels_ + skip_channels_, growth, layers, true, bn_momentum, bn_eps),
      head_(bottleneck_channels_ + skip_channels_ + layers * growth, 1, 1, 1, 0) {
    transition_down_.add(std::make_unique<BatchNorm2d<T>>(skip_channels_, bn_momentum, bn_eps));
    transition_down_.add(std::make_unique<ReLU<T>>());
    transition_down_.add(std::make_unique<Conv2d<T>>(skip_channels_, skip_channels_, 3, 2, 1));
}

template <typename T>
Shape DenseUNet<T>::output_shape(const Shape& in) const {
    const Shape skip = down_.output_shape(stem_.output_shape(in));
    const Shape up = transition_up_.output_shape(bottleneck_.output_shape(transition_down_.output_shape(skip)));
    if (up.h != skip.h || up.w != skip.w) {
        throw ShapeError("unet: input " + in.to_string() + " does not survive one down/up level");
    }
    return head_.output_shape(up_.output_shape({in.n, up.c + skip.c, up.h, up.w}));
}

template <typename T>
Tensor<T> DenseUNet<T>::forward(const Tensor<T>& x, Mode mode) {
    output_shape(x.shape());
    const Tensor<T> skip = down_.forward(stem_.forward(x, mode), mode);
    const Tensor<T> up =
        transition_up_.forward(bottleneck_.forward(transition_down_.forward(skip, mode), mode), mode);
    const Shape& s = skip.shape();
    Tensor<T> joined({s.n, bottleneck_channels_ + skip_channels_, s.h, s.w});
    copy_channels(up, 0, joined, 0, bottleneck_channels_);
    copy_channels(skip, 0, joined, bottleneck_channels_, skip_channels_);
    return head_.forward(up_.forward(joined, mode), mode);
}

template <typename T>
Tensor<T> DenseUNet<T>::backward(const Tensor<T>& grad) {
    const Tensor<T> g_joined = up_.backward(head_.backward(grad));
    const Shape& s = g_joined.shape();
    Tensor<T> g_up({s.n, bottleneck_channels_, s.h, s.w});
    Tensor<T> g_skip({s.n, skip_channels_, s.h, s.w});
    copy_channels(g_joined, 0, g_up, 0, bottleneck_channels_);
    copy_channels(g_joined, bottleneck_channels_, g_skip, 0, skip_channels_);
    const Tensor<T> g_through =
        transition_down_.backward(bottleneck_.backward(transition_up_.backward(g_up)));
    add_channels(g_through, 0, g_skip, 0, skip_channels_);
    return stem_.backward(down_.backward(g_skip));
}

template <typename T>
void DenseUNet<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    stem_.collect_parameters(out);
    down_.collect_parameters(out);
    transition_down_.collect_parameters(out);
    bottleneck_.collect_parameters(out);
    transition_up_.collect_parameters(out);
    up_.collect_parameters(out);
    head_.collect_parameters(out);
}

template <typename T>
void DenseUNet<T>::collect_buffers(std::vector<Parameter<T>*>& out) {
    down_.collect_buffers(out);
    transition_down_.collect_buffers(out);
    bottleneck_.collect_buffers(out);
    up_.collect_buffers(out);
}

template <typename T>
void DenseUNet<T>::initialize(Rng& rng) {
    stem_.initialize(rng);
    down_.initialize(rng);
    transition_down_.initialize(rng);
    bottleneck_.initialize(rng);
    transition_up_.initialize(rng);
    up_.initialize(rng);
    head_.initialize(rng);
}

template <typename T>
void DenseUNet<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    const std::string p = prefix.empty() ? "" : prefix + ".";
    stem_.set_name(p + "stem");
    down_.set_name(p + "down");
    transition_down_.set_name(p + "transition_down");
    bottleneck_.set_name(p + "bottleneck");
    transition_up_.set_name(p + "transition_up");
    up_.set_name(p + "up");
    head_.set_name(p + "head");
}

template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class ReLU<float>;
template class ReLU<double>;
template class Sequential<float>;
template class Sequential<double>;
template class DenseBlock<float>;
template class DenseBlock<double>;
template class DenseUNet<float>;
template class DenseUNet<double>;

}  // namespace destrike::nn
