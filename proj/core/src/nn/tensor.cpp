#include <destrike/nn/tensor.hpp>

#include <destrike/errors.hpp>

#include <algorithm>

namespace destrike::nn {

std::string Shape::to_string() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

namespace {

template <typename T>
void check_channel_op(const Tensor<T>& src, int src_c0, const Tensor<T>& dst, int dst_c0, int count) {
    const Shape& a = src.shape();
    const Shape& b = dst.shape();
    if (a.n != b.n || a.h != b.h || a.w != b.w || src_c0 < 0 || dst_c0 < 0 ||
        src_c0 + count > a.c || dst_c0 + count > b.c) {
        throw ShapeError("channel copy " + a.to_string() + " -> " + b.to_string() + " out of range");
    }
}

}  // namespace

template <typename T>
void copy_channels(const Tensor<T>& src, int src_c0, Tensor<T>& dst, int dst_c0, int count) {
    check_channel_op(src, src_c0, dst, dst_c0, count);
    const std::size_t span = static_cast<std::size_t>(count) * src.shape().plane();
    for (int n = 0; n < src.shape().n; ++n) {
        const T* from = src.channel(n, src_c0);
        std::copy(from, from + span, dst.channel(n, dst_c0));
    }
}

template <typename T>
void add_channels(const Tensor<T>& src, int src_c0, Tensor<T>& dst, int dst_c0, int count) {
    check_channel_op(src, src_c0, dst, dst_c0, count);
    const std::size_t span = static_cast<std::size_t>(count) * src.shape().plane();
    for (int n = 0; n < src.shape().n; ++n) {
        const T* from = src.channel(n, src_c0);
        T* to = dst.channel(n, dst_c0);
        for (std::size_t i = 0; i < span; ++i) to[i] += from[i];
    }
}

template void copy_channels<float>(const Tensor<float>&, int, Tensor<float>&, int, int);
template void copy_channels<double>(const Tensor<double>&, int, Tensor<double>&, int, int);
template void add_channels<float>(const Tensor<float>&, int, Tensor<float>&, int, int);
template void add_channels<double>(const Tensor<double>&, int, Tensor<double>&, int, int);

}  // namespace destrike::nn
