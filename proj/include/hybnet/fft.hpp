#pragma once

// Discrete Fourier transforms. Convention: unnormalized forward transform,
// X[k] = sum_n x[n] exp(-j 2 pi k n / N); the inverse divides by N.

#include <cstddef>

#include "hybnet/common.hpp"

namespace hybnet {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
inline void fft_inplace(CVec& x, bool inverse = false) {
    const std::size_t n = x.size();
    if (!is_pow2(n))
        throw std::invalid_argument("fft_inplace: size must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = x[i + k];
                cplx v = w * x[i + k + len / 2];
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= inv;
    }
}

inline CVec fft(const CVec& x) {
    CVec y = x;
    fft_inplace(y);
    return y;
}

inline CVec ifft(const CVec& x) {
    CVec y = x;
    fft_inplace(y, /*inverse=*/true);
    return y;
}

// O(n^2) transform for sizes that are not a power of two.
inline CVec dft(const CVec& x) {
    const std::size_t n = x.size();
    if (is_pow2(n)) return fft(x);
    CVec y(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double ang = -kTwoPi * static_cast<double>(k) * static_cast<double>(i) /
                         static_cast<double>(n);
            acc += x[i] * cplx(std::cos(ang), std::sin(ang));
        }
        y[k] = acc;
    }
    return y;
}

// Symmetric Hamming window: g[i] = 0.54 - 0.46 cos(2 pi i / (len - 1)).
inline std::vector<double> hamming_window(int len) {
    if (len < 1) throw std::invalid_argument("hamming_window: len must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(len));
    if (len == 1) {
        w[0] = 1.0;
        return w;
    }
    for (int i = 0; i < len; ++i)
        w[static_cast<std::size_t>(i)] =
            0.54 - 0.46 * std::cos(kTwoPi * i / static_cast<double>(len - 1));
    return w;
}

}  // namespace hybnet
