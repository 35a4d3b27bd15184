#pragma once

// Dense n-dimensional array, row-major. Feature maps use [h, w, c] and
// batches add a leading dimension: [n, h, w, c].

#include <array>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hybnet::nn {

template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), T(0));
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::domain_error("Tensor: non-positive dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int dim(std::size_t i) const { return shape.at(i); }
    int rank() const { return static_cast<int>(shape.size()); }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    // [n, h, w, c] accessors
    T& at4(int n, int h, int w, int c) {
        return data[idx4(n, h, w, c)];
    }
    T at4(int n, int h, int w, int c) const { return data[idx4(n, h, w, c)]; }
    std::size_t idx4(int n, int h, int w, int c) const {
        return ((static_cast<std::size_t>(n) * shape[1] + h) * shape[2] + w) *
                   static_cast<std::size_t>(shape[3]) +
               static_cast<std::size_t>(c);
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Stack per-sample [h, w, c] tensors into one [n, h, w, c] batch.
template <typename T>
Tensor<T> stack(const std::vector<Tensor<T>>& items) {
    if (items.empty()) throw std::domain_error("stack: empty input");
    const auto& s0 = items.front().shape;
    Tensor<T> out(std::vector<int>{static_cast<int>(items.size()), s0[0], s0[1], s0[2]});
    const std::size_t stride = items.front().numel();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].shape != s0) throw std::domain_error("stack: shape mismatch");
        std::copy(items[i].data.begin(), items[i].data.end(), out.data.begin() + i * stride);
    }
    return out;
}

// Copy selected rows of a [n, ...] tensor into a new batch.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, const std::vector<std::size_t>& rows) {
    if (x.rank() < 2) throw std::domain_error("gather_rows: need a batch dimension");
    std::vector<int> s = x.shape;
    s[0] = static_cast<int>(rows.size());
    Tensor<T> out(s);
    const std::size_t stride = x.numel() / static_cast<std::size_t>(x.shape[0]);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(x.data.begin() + rows[i] * stride, x.data.begin() + (rows[i] + 1) * stride,
                  out.data.begin() + i * stride);
    return out;
}

}  // namespace hybnet::nn
