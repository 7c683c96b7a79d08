#include <destrike/nn/layers.hpp>

#include <destrike/errors.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace destrike::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Upper bound on the scratch column buffer, in elements.
constexpr std::size_t kColumnBudget = std::size_t{1} << 18;

struct Grid {
    int channels;
    int height;
    int width;
};

int chunk_for(int rows, int pixels) {
    const auto per = static_cast<std::size_t>(std::max(1, rows));
    return static_cast<int>(std::clamp<std::size_t>(kColumnBudget / per, 1, static_cast<std::size_t>(pixels)));
}

// Output columns q of a row run whose tap lands inside [0, width):
// 0 <= (ow0 + q) * stride - padding + kw < width.
struct ValidRange {
    int lo;
    int hi;
};

ValidRange valid_taps(int ow0, int run, int stride, int offset, int width) {
    // offset = kw - padding; smallest q with (ow0 + q) * stride + offset >= 0
    const int first_ow = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
    const int last_ow = (width - 1 - offset) >= 0 ? (width - 1 - offset) / stride : -1;
    const int lo = std::clamp(first_ow - ow0, 0, run);
    const int hi = std::clamp(last_ow - ow0 + 1, lo, run);
    return {lo, hi};
}

// Patch matrix for small-grid pixels [p0, p1): row (c * k + kh) * k + kw,
// column p - p0. Out-of-bounds taps read zero.
template <typename T>
void im2col(const T* img, Grid large, const ConvGeometry& g, int small_w, int p0, int p1, T* cols) {
    const int pc = p1 - p0;
    const int k = g.kernel;
    const int s = g.stride;
    for (int c = 0; c < large.channels; ++c) {
        const T* plane = img + static_cast<std::size_t>(c) * large.height * large.width;
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                T* row = cols + static_cast<std::size_t>((c * k + kh) * k + kw) * pc;
                const int offset = kw - g.padding;
                int p = p0;
                while (p < p1) {
                    const int oh = p / small_w;
                    const int ow0 = p % small_w;
                    const int run = std::min(p1, (oh + 1) * small_w) - p;
                    const int ih = oh * s - g.padding + kh;
                    T* dst = row + (p - p0);
                    if (ih < 0 || ih >= large.height) {
                        std::fill(dst, dst + run, T(0));
                    } else {
                        const T* src = plane + static_cast<std::size_t>(ih) * large.width;
                        const auto [lo, hi] = valid_taps(ow0, run, s, offset, large.width);
                        std::fill(dst, dst + lo, T(0));
                        if (s == 1) {
                            std::copy(src + ow0 + lo + offset, src + ow0 + hi + offset, dst + lo);
                        } else {
                            for (int q = lo; q < hi; ++q) dst[q] = src[(ow0 + q) * s + offset];
                        }
                        std::fill(dst + hi, dst + run, T(0));
                    }
                    p += run;
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, Grid large, const ConvGeometry& g, int small_w, int p0, int p1, T* img) {
    const int pc = p1 - p0;
    const int k = g.kernel;
    const int s = g.stride;
    for (int c = 0; c < large.channels; ++c) {
        T* plane = img + static_cast<std::size_t>(c) * large.height * large.width;
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                const T* row = cols + static_cast<std::size_t>((c * k + kh) * k + kw) * pc;
                const int offset = kw - g.padding;
                int p = p0;
                while (p < p1) {
                    const int oh = p / small_w;
                    const int ow0 = p % small_w;
                    const int run = std::min(p1, (oh + 1) * small_w) - p;
                    const int ih = oh * s - g.padding + kh;
                    if (ih >= 0 && ih < large.height) {
                        const T* src = row + (p - p0);
                        T* dst = plane + static_cast<std::size_t>(ih) * large.width;
                        const auto [lo, hi] = valid_taps(ow0, run, s, offset, large.width);
                        if (s == 1) {
                            T* d = dst + ow0 + offset;
                            for (int q = lo; q < hi; ++q) d[q] += src[q];
                        } else {
                            for (int q = lo; q < hi; ++q) dst[(ow0 + q) * s + offset] += src[q];
                        }
                    }
                    p += run;
                }
            }
        }
    }
}

template <typename T>
void add_bias(Tensor<T>& y, const std::vector<T>& bias) {
    const std::size_t plane = y.shape().plane();
    for (int n = 0; n < y.shape().n; ++n) {
        for (int c = 0; c < y.shape().c; ++c) {
            T* p = y.channel(n, c);
            const T b = bias[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < plane; ++i) p[i] += b;
        }
    }
}

template <typename T>
void accumulate_bias_grad(const Tensor<T>& grad, std::vector<T>& bias_grad) {
    const std::size_t plane = grad.shape().plane();
    for (int c = 0; c < grad.shape().c; ++c) {
        double sum = 0.0;
        for (int n = 0; n < grad.shape().n; ++n) {
            const T* p = grad.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) sum += static_cast<double>(p[i]);
        }
        bias_grad[static_cast<std::size_t>(c)] += static_cast<T>(sum);
    }
}

template <typename T>
void uniform_init(std::vector<T>& values, double bound, Rng& rng) {
    for (T& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
}

void check_positive(int v, const char* what) {
    if (v < 1) throw ShapeError(std::string(what) + " must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : in_channels_(in_channels), out_channels_(out_channels), geom_{kernel, stride, padding} {
    check_positive(in_channels, "in_channels");
    check_positive(out_channels, "out_channels");
    check_positive(kernel, "kernel");
    check_positive(stride, "stride");
    weight_.value.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, T(0));
    weight_.grad.assign(weight_.value.size(), T(0));
    bias_.value.assign(static_cast<std::size_t>(out_channels), T(0));
    bias_.grad.assign(bias_.value.size(), T(0));
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
    if (in.c != in_channels_) {
        throw ShapeError(this->name_ + ": expected " + std::to_string(in_channels_) +
                         " input channels, got " + in.to_string());
    }
    const Shape out{in.n, out_channels_, geom_.reduced(in.h), geom_.reduced(in.w)};
    if (in.h + 2 * geom_.padding < geom_.kernel || in.w + 2 * geom_.padding < geom_.kernel ||
        out.h < 1 || out.w < 1) {
        throw ShapeError(this->name_ + ": input " + in.to_string() + " too small for kernel");
    }
    return out;
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode mode) {
    const Shape os = output_shape(x.shape());
    auto y = Tensor<T>::uninitialized(os);
    const int K = in_channels_ * geom_.kernel * geom_.kernel;
    const int P = os.h * os.w;
    const int chunk = chunk_for(K, P);
    std::vector<T> cols(static_cast<std::size_t>(K) * chunk);
    const ConstMatMap<T> W(weight_.value.data(), out_channels_, K);
    const Grid large{in_channels_, x.shape().h, x.shape().w};

    for (int n = 0; n < os.n; ++n) {
        MatMap<T> Y(y.image(n), out_channels_, P);
        for (int p0 = 0; p0 < P; p0 += chunk) {
            const int pc = std::min(chunk, P - p0);
            im2col(x.image(n), large, geom_, os.w, p0, p0 + pc, cols.data());
            const ConstMatMap<T> C(cols.data(), K, pc);
            Y.middleCols(p0, pc).noalias() = W * C;
        }
    }
    add_bias(y, bias_.value);
    if (mode == Mode::train) input_ = x;
    return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad) {
    const Shape& is = input_.shape();
    const Shape os = output_shape(is);
    if (!(grad.shape() == os)) throw ShapeError(this->name_ + ": gradient shape mismatch");
    Tensor<T> dx(is);
    const int K = in_channels_ * geom_.kernel * geom_.kernel;
    const int P = os.h * os.w;
    const int chunk = chunk_for(K, P);
    std::vector<T> cols(static_cast<std::size_t>(K) * chunk);
    std::vector<T> dcols(cols.size());
    const ConstMatMap<T> W(weight_.value.data(), out_channels_, K);
    MatMap<T> dW(weight_.grad.data(), out_channels_, K);
    const Grid large{in_channels_, is.h, is.w};

    accumulate_bias_grad(grad, bias_.grad);
    for (int n = 0; n < os.n; ++n) {
        const ConstMatMap<T> dY(grad.image(n), out_channels_, P);
        for (int p0 = 0; p0 < P; p0 += chunk) {
            const int pc = std::min(chunk, P - p0);
            im2col(input_.image(n), large, geom_, os.w, p0, p0 + pc, cols.data());
            const ConstMatMap<T> C(cols.data(), K, pc);
            dW.noalias() += dY.middleCols(p0, pc) * C.transpose();
            MatMap<T> dC(dcols.data(), K, pc);
            dC.noalias() = W.transpose() * dY.middleCols(p0, pc);
            col2im_add(dcols.data(), large, geom_, os.w, p0, p0 + pc, dx.image(n));
        }
    }
    return dx;
}

template <typename T>
void Conv2d<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

template <typename T>
void Conv2d<T>::initialize(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels_) * geom_.kernel * geom_.kernel);
    uniform_init(weight_.value, bound, rng);
    uniform_init(bias_.value, bound, rng);
}

template <typename T>
void Conv2d<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    weight_.name = prefix + ".weight";
    bias_.name = prefix + ".bias";
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride,
                                    int padding, int output_padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      geom_{kernel, stride, padding},
      output_padding_(output_padding) {
    check_positive(in_channels, "in_channels");
    check_positive(out_channels, "out_channels");
    check_positive(kernel, "kernel");
    check_positive(stride, "stride");
    if (output_padding < 0 || output_padding >= stride) {
        throw ShapeError("output_padding must lie in [0, stride)");
    }
    weight_.value.assign(static_cast<std::size_t>(in_channels) * out_channels * kernel * kernel, T(0));
    weight_.grad.assign(weight_.value.size(), T(0));
    bias_.value.assign(static_cast<std::size_t>(out_channels), T(0));
    bias_.grad.assign(bias_.value.size(), T(0));
}

template <typename T>
Shape ConvTranspose2d<T>::output_shape(const Shape& in) const {
    if (in.c != in_channels_) {
        throw ShapeError(this->name_ + ": expected " + std::to_string(in_channels_) +
                         " input channels, got " + in.to_string());
    }
    const auto grow = [&](int extent) {
        return (extent - 1) * geom_.stride - 2 * geom_.padding + geom_.kernel + output_padding_;
    };
    const Shape out{in.n, out_channels_, grow(in.h), grow(in.w)};
    if (out.h < 1 || out.w < 1 || geom_.reduced(out.h) != in.h || geom_.reduced(out.w) != in.w) {
        throw ShapeError(this->name_ + ": input " + in.to_string() + " incompatible with geometry");
    }
    return out;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x, Mode mode) {
    const Shape& is = x.shape();
    const Shape os = output_shape(is);
    Tensor<T> y(os);
    const int K = out_channels_ * geom_.kernel * geom_.kernel;
    const int P = is.h * is.w;
    const int chunk = chunk_for(K, P);
    std::vector<T> cols(static_cast<std::size_t>(K) * chunk);
    const ConstMatMap<T> W(weight_.value.data(), in_channels_, K);
    const Grid large{out_channels_, os.h, os.w};

    for (int n = 0; n < is.n; ++n) {
        const ConstMatMap<T> X(x.image(n), in_channels_, P);
        for (int p0 = 0; p0 < P; p0 += chunk) {
            const int pc = std::min(chunk, P - p0);
            MatMap<T> C(cols.data(), K, pc);
            C.noalias() = W.transpose() * X.middleCols(p0, pc);
            col2im_add(cols.data(), large, geom_, is.w, p0, p0 + pc, y.image(n));
        }
    }
    add_bias(y, bias_.value);
    if (mode == Mode::train) input_ = x;
    return y;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& grad) {
    const Shape& is = input_.shape();
    const Shape os = output_shape(is);
    if (!(grad.shape() == os)) throw ShapeError(this->name_ + ": gradient shape mismatch");
    auto dx = Tensor<T>::uninitialized(is);
    const int K = out_channels_ * geom_.kernel * geom_.kernel;
    const int P = is.h * is.w;
    const int chunk = chunk_for(K, P);
    std::vector<T> cols(static_cast<std::size_t>(K) * chunk);
    const ConstMatMap<T> W(weight_.value.data(), in_channels_, K);
    MatMap<T> dW(weight_.grad.data(), in_channels_, K);
    const Grid large{out_channels_, os.h, os.w};

    accumulate_bias_grad(grad, bias_.grad);
    for (int n = 0; n < is.n; ++n) {
        const ConstMatMap<T> X(input_.image(n), in_channels_, P);
        MatMap<T> dX(dx.image(n), in_channels_, P);
        for (int p0 = 0; p0 < P; p0 += chunk) {
            const int pc = std::min(chunk, P - p0);
            im2col(grad.image(n), large, geom_, is.w, p0, p0 + pc, cols.data());
            const ConstMatMap<T> C(cols.data(), K, pc);
            dX.middleCols(p0, pc).noalias() = W * C;
            dW.noalias() += X.middleCols(p0, pc) * C.transpose();
        }
    }
    return dx;
}

template <typename T>
void ConvTranspose2d<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

template <typename T>
void ConvTranspose2d<T>::initialize(Rng& rng) {
    // fan-in as computed from the [in][out][k][k] weight layout's second axis
    const double bound = 1.0 / std::sqrt(static_cast<double>(out_channels_) * geom_.kernel * geom_.kernel);
    uniform_init(weight_.value, bound, rng);
    uniform_init(bias_.value, bound, rng);
}

template <typename T>
void ConvTranspose2d<T>::set_name(const std::string& prefix) {
    this->name_ = prefix;
    weight_.name = prefix + ".weight";
    bias_.name = prefix + ".bias";
}

template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;

}  // namespace destrike::nn
