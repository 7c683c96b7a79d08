#pragma once

#include <destrike/nn/tensor.hpp>
#include <destrike/rng.hpp>

#include <memory>
#include <string>
#include <vector>

namespace destrike::nn {

enum class Mode { train, eval };

/// A named array of scalars. Trainable parameters carry a gradient of the
/// same size; buffers (batch-norm running statistics) leave it empty.
template <typename T>
struct Parameter {
    std::string name;
    std::vector<T> value;
    std::vector<T> grad;

    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

/// Differentiable layer. forward() in train mode caches whatever backward()
/// needs; backward() consumes the gradient of the output, accumulates
/// parameter gradients and returns the gradient of the input.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual Shape output_shape(const Shape& in) const = 0;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad) = 0;

    virtual void collect_parameters(std::vector<Parameter<T>*>&) {}
    virtual void collect_buffers(std::vector<Parameter<T>*>&) {}
    /// Draws initial parameter values in a fixed traversal order.
    virtual void initialize(Rng&) {}
    /// Prefixes every parameter name; called once after construction.
    virtual void set_name(const std::string& prefix) { name_ = prefix; }

    const std::string& name() const noexcept { return name_; }

protected:
    std::string name_;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

/// Kernel/stride/padding of a convolution between a "large" grid and a
/// "small" one; shared by Conv2d (large -> small) and ConvTranspose2d
/// (small -> large).
struct ConvGeometry {
    int kernel = 3;
    int stride = 1;
    int padding = 0;

    int reduced(int extent) const noexcept { return (extent + 2 * padding - kernel) / stride + 1; }
};

template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

    Parameter<T>& weight() { return weight_; }
    Parameter<T>& bias() { return bias_; }

private:
    int in_channels_;
    int out_channels_;
    ConvGeometry geom_;
    Parameter<T> weight_;  // [out][in][k][k]
    Parameter<T> bias_;
    Tensor<T> input_;
};

/// Output extent: (in - 1) * stride - 2 * padding + kernel + output_padding.
template <typename T>
class ConvTranspose2d final : public Layer<T> {
public:
    ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int padding,
                    int output_padding);

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

private:
    int in_channels_;
    int out_channels_;
    ConvGeometry geom_;
    int output_padding_;
    Parameter<T> weight_;  // [in][out][k][k]
    Parameter<T> bias_;
    Tensor<T> input_;
};

template <typename T>
class BatchNorm2d final : public Layer<T> {
public:
    BatchNorm2d(int channels, double momentum, double eps);

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void collect_buffers(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

private:
    int channels_;
    double momentum_;
    double eps_;
    Parameter<T> gamma_;
    Parameter<T> beta_;
    Parameter<T> running_mean_;
    Parameter<T> running_var_;
    Tensor<T> normalized_;
    std::vector<double> inv_std_;
};

template <typename T>
class ReLU final : public Layer<T> {
public:
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;

private:
    Tensor<T> output_;
};

template <typename T>
class Sequential final : public Layer<T> {
public:
    Sequential() = default;
    explicit Sequential(std::vector<LayerPtr<T>> layers) : layers_(std::move(layers)) {}

    Sequential& add(LayerPtr<T> layer) {
        layers_.push_back(std::move(layer));
        return *this;
    }
    std::size_t size() const noexcept { return layers_.size(); }

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void collect_buffers(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

private:
    std::vector<LayerPtr<T>> layers_;
};

/// Densely connected block: layer i sees the concatenation of the block input
/// and all earlier layer outputs. Each layer is BN -> ReLU -> Conv3x3 emitting
/// `growth` channels. The output is either input + all new features
/// (keep_input) or only the new features.
template <typename T>
class DenseBlock final : public Layer<T> {
public:
    DenseBlock(int in_channels, int growth, int layers, bool keep_input, double bn_momentum,
               double bn_eps);

    int out_channels() const noexcept {
        return (keep_input_ ? in_channels_ : 0) + growth_ * static_cast<int>(layers_.size());
    }

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void collect_buffers(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

private:
    int in_channels_;
    int growth_;
    bool keep_input_;
    std::vector<std::unique_ptr<Sequential<T>>> layers_;
    Shape features_shape_{};
};

/// Single-level dense U-Net: stem conv, down dense block, strided transition,
/// bottleneck dense block, transposed-conv up transition, skip concatenation,
/// up dense block, 1x1 projection to one channel.
template <typename T>
class DenseUNet final : public Layer<T> {
public:
    DenseUNet(int stem_channels, int growth, int layers, double bn_momentum, double bn_eps);

    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad) override;
    void collect_parameters(std::vector<Parameter<T>*>& out) override;
    void collect_buffers(std::vector<Parameter<T>*>& out) override;
    void initialize(Rng& rng) override;
    void set_name(const std::string& prefix) override;

private:
    int skip_channels_;
    int bottleneck_channels_;
    Conv2d<T> stem_;
    DenseBlock<T> down_;
    Sequential<T> transition_down_;
    DenseBlock<T> bottleneck_;
    ConvTranspose2d<T> transition_up_;
    DenseBlock<T> up_;
    Conv2d<T> head_;
};

}  // namespace destrike::nn
