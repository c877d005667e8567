#pragma once

// Dense [N, C, H, W] value container used for image batches and all per-pixel
// fields (gradient magnitude, noise coefficients, variances). Scalar is float
// for training throughput and double for the algebraic test paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "epd/rng.hpp"

namespace epd {

template <typename Scalar>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<Scalar> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, Scalar(0)) {}

    static Tensor full(int n, int c, int h, int w, Scalar v) {
        Tensor t(n, c, h, w);
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor randn(int n, int c, int h, int w, Rng& rng) {
        Tensor t(n, c, h, w);
        for (auto& v : t.data) v = static_cast<Scalar>(rng.normal());
        return t;
    }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    size_t pixels_per_image() const { return static_cast<size_t>(c) * h * w; }

    Scalar& operator[](size_t i) { return data[i]; }
    const Scalar& operator[](size_t i) const { return data[i]; }

    Scalar& at(int in, int ic, int iy, int ix) {
        return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    const Scalar& at(int in, int ic, int iy, int ix) const {
        return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    Scalar* image(int in) { return data.data() + static_cast<size_t>(in) * pixels_per_image(); }
    const Scalar* image(int in) const {
        return data.data() + static_cast<size_t>(in) * pixels_per_image();
    }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    // Single image view as a copy (used by per-sample dataset plumbing).
    Tensor slice(int in, int count = 1) const {
        Tensor out(count, c, h, w);
        std::copy(image(in), image(in) + count * pixels_per_image(), out.data.begin());
        return out;
    }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out(n, c, h, w);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }

    void fill(Scalar v) { std::fill(data.begin(), data.end(), v); }

    Tensor& operator+=(const Tensor& o) {
        check_same(o);
        for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        check_same(o);
        for (size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
        return *this;
    }
    Tensor& operator*=(Scalar s) {
        for (auto& v : data) v *= s;
        return *this;
    }

    void check_same(const Tensor& o) const {
        if (!same_shape(o)) throw std::invalid_argument("tensor shape mismatch");
    }
};

template <typename Scalar>
Tensor<Scalar> operator+(Tensor<Scalar> a, const Tensor<Scalar>& b) { return a += b; }
template <typename Scalar>
Tensor<Scalar> operator-(Tensor<Scalar> a, const Tensor<Scalar>& b) { return a -= b; }

template <typename Scalar>
Tensor<Scalar> hadamard(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
    a.check_same(b);
    Tensor<Scalar> out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

template <typename Scalar>
double mean(const Tensor<Scalar>& t) {
    double s = 0;
    for (const auto& v : t.data) s += static_cast<double>(v);
    return t.empty() ? 0.0 : s / static_cast<double>(t.size());
}

template <typename Scalar>
double mean_squared_error(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
    a.check_same(b);
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

template <typename Scalar>
double max_abs_diff(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
    a.check_same(b);
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

template <typename Scalar>
void clamp_inplace(Tensor<Scalar>& t, Scalar lo, Scalar hi) {
    for (auto& v : t.data) v = std::clamp(v, lo, hi);
}

// Peak signal-to-noise ratio in dB; data range is [-1, 1], so peak = 2.
template <typename Scalar>
double psnr(const Tensor<Scalar>& a, const Tensor<Scalar>& b, double peak = 2.0) {
    const double mse = mean_squared_error(a, b);
    if (mse <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

template <typename Scalar>
using ImageBatch = Tensor<Scalar>;

}  // namespace epd
