#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace destrike::nn {

/// NCHW extent.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t numel() const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
               static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    std::size_t plane() const noexcept {
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    std::size_t image() const noexcept { return static_cast<std::size_t>(c) * plane(); }

    std::string to_string() const;
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Allocator whose value-initialization is a no-op, so buffers that are
/// about to be overwritten are not zeroed first.
template <typename T>
struct UninitializedAllocator : std::allocator<T> {
    template <typename U>
    struct rebind {
        using other = UninitializedAllocator<U>;
    };
    using std::allocator<T>::allocator;

    template <typename U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

/// Dense NCHW tensor owning its storage.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.numel(), fill) {}

    /// Tensor with indeterminate contents, for outputs written in full.
    static Tensor uninitialized(Shape shape) {
        Tensor t;
        t.shape_ = shape;
        t.data_.resize(shape.numel());
        return t;
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    T* image(int n) noexcept { return data_.data() + static_cast<std::size_t>(n) * shape_.image(); }
    const T* image(int n) const noexcept {
        return data_.data() + static_cast<std::size_t>(n) * shape_.image();
    }
    T* channel(int n, int c) noexcept { return image(n) + static_cast<std::size_t>(c) * shape_.plane(); }
    const T* channel(int n, int c) const noexcept {
        return image(n) + static_cast<std::size_t>(c) * shape_.plane();
    }

    T& at(int n, int c, int h, int w) noexcept {
        return channel(n, c)[static_cast<std::size_t>(h) * static_cast<std::size_t>(shape_.w) +
                             static_cast<std::size_t>(w)];
    }
    T at(int n, int c, int h, int w) const noexcept {
        return channel(n, c)[static_cast<std::size_t>(h) * static_cast<std::size_t>(shape_.w) +
                             static_cast<std::size_t>(w)];
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_{};
    std::vector<T, UninitializedAllocator<T>> data_;
};

/// Copies `count` channels of every image in src (starting at src_c0) into
/// dst starting at dst_c0. Batch and spatial extents must agree.
template <typename T>
void copy_channels(const Tensor<T>& src, int src_c0, Tensor<T>& dst, int dst_c0, int count);

/// Adds rather than overwrites.
template <typename T>
void add_channels(const Tensor<T>& src, int src_c0, Tensor<T>& dst, int dst_c0, int count);

}  // namespace destrike::nn
