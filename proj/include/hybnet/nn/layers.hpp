#pragma once

// Layer implementations for the small CNN engine: 2-D convolution (1-D as a
// degenerate width), batch normalization, ReLU, max pooling, inverted
// dropout, fully connected, and softmax. Each layer owns its parameters,
// gradients, and optimizer velocity, and caches what its backward pass needs.
//
// Conventions: activations are [n, h, w, c]; convolution is cross-correlation
// with 'same' zero padding at stride 1; backward passes overwrite gradients.

#include <array>
#include <memory>

#include "hybnet/nn/tensor.hpp"
#include "hybnet/rng.hpp"

namespace hybnet::nn {

enum class Mode { train, infer };

template <typename T>
struct ParamBlock {
    std::vector<T> value;
    std::vector<T> grad;
    std::vector<T> velocity;
    bool weight_decay = false;  // L2 applies to weights only

    void resize(std::size_t n) {
        value.assign(n, T(0));
        grad.assign(n, T(0));
        velocity.assign(n, T(0));
    }
};

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
    virtual std::vector<ParamBlock<T>*> param_blocks() { return {}; }
    virtual std::array<int, 3> out_shape(std::array<int, 3> in) const = 0;
};

// ---------------------------------------------------------------------------
// Convolution

template <typename T>
class Conv : public Layer<T> {
public:
    Conv(int in_channels, int filters, int fh, int fw)
        : in_c_(in_channels), filters_(filters), fh_(fh), fw_(fw) {
        if (in_channels <= 0 || filters <= 0 || fh <= 0 || fw <= 0)
            throw std::domain_error("Conv: non-positive parameter");
        if (fh % 2 == 0 || fw % 2 == 0)
            throw std::domain_error("Conv: filter dims must be odd for 'same' padding");
        weights_.resize(static_cast<std::size_t>(fh) * fw * in_channels * filters);
        weights_.weight_decay = true;
        bias_.resize(static_cast<std::size_t>(filters));
    }

    void init(Rng& rng) {
        const double fan_in = static_cast<double>(fh_) * fw_ * in_c_;
        const double std_dev = std::sqrt(2.0 / fan_in);
        for (auto& w : weights_.value) w = static_cast<T>(rng.gaussian() * std_dev);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode, Rng*) override {
        check_input(x);
        x_ = x;
        const int n = x.shape[0], h = x.shape[1], w = x.shape[2];
        Tensor<T> y(std::vector<int>{n, h, w, filters_});
        const int ph = fh_ / 2, pw = fw_ / 2;
        const T* wv = weights_.value.data();
        for (int b = 0; b < n; ++b)
            for (int oy = 0; oy < h; ++oy)
                for (int ox = 0; ox < w; ++ox) {
                    T* acc = &y.data[y.idx4(b, oy, ox, 0)];
                    for (int f = 0; f < filters_; ++f) acc[f] = bias_.value[f];
                    const int dy0 = std::max(0, ph - oy), dy1 = std::min(fh_, h + ph - oy);
                    const int dx0 = std::max(0, pw - ox), dx1 = std::min(fw_, w + pw - ox);
                    for (int dy = dy0; dy < dy1; ++dy)
                        for (int dx = dx0; dx < dx1; ++dx) {
                            const T* xp = &x.data[x.idx4(b, oy + dy - ph, ox + dx - pw, 0)];
                            const T* wp = wv + (static_cast<std::size_t>(dy) * fw_ + dx) *
                                                   in_c_ * filters_;
                            for (int ci = 0; ci < in_c_; ++ci) {
                                const T xv = xp[ci];
                                const T* wr = wp + static_cast<std::size_t>(ci) * filters_;
                                for (int f = 0; f < filters_; ++f) acc[f] += xv * wr[f];
                            }
                        }
                }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const int n = x_.shape[0], h = x_.shape[1], w = x_.shape[2];
        const int ph = fh_ / 2, pw = fw_ / 2;
        std::fill(weights_.grad.begin(), weights_.grad.end(), T(0));
        std::fill(bias_.grad.begin(), bias_.grad.end(), T(0));
        Tensor<T> gx(x_.shape);

        T* gw = weights_.grad.data();
        const T* wv = weights_.value.data();
        for (int b = 0; b < n; ++b)
            for (int oy = 0; oy < h; ++oy)
                for (int ox = 0; ox < w; ++ox) {
                    const T* gp = &g.data[g.idx4(b, oy, ox, 0)];
                    for (int f = 0; f < filters_; ++f) bias_.grad[f] += gp[f];
                    const int dy0 = std::max(0, ph - oy), dy1 = std::min(fh_, h + ph - oy);
                    const int dx0 = std::max(0, pw - ox), dx1 = std::min(fw_, w + pw - ox);
                    for (int dy = dy0; dy < dy1; ++dy)
                        for (int dx = dx0; dx < dx1; ++dx) {
                            const std::size_t xi = x_.idx4(b, oy + dy - ph, ox + dx - pw, 0);
                            const T* xp = &x_.data[xi];
                            T* gxp = &gx.data[xi];
                            const std::size_t wo =
                                (static_cast<std::size_t>(dy) * fw_ + dx) * in_c_ * filters_;
                            for (int ci = 0; ci < in_c_; ++ci) {
                                const T xv = xp[ci];
                                T* gwr = gw + wo + static_cast<std::size_t>(ci) * filters_;
                                const T* wr = wv + wo + static_cast<std::size_t>(ci) * filters_;
                                T acc = T(0);
                                for (int f = 0; f < filters_; ++f) {
                                    gwr[f] += xv * gp[f];
                                    acc += wr[f] * gp[f];
                                }
                                gxp[ci] += acc;
                            }
                        }
                }
        return gx;
    }

    std::vector<ParamBlock<T>*> param_blocks() override { return {&weights_, &bias_}; }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override {
        if (in[2] != in_c_) throw std::domain_error("Conv: channel mismatch");
        return {in[0], in[1], filters_};
    }

    int filters() const { return filters_; }

private:
    void check_input(const Tensor<T>& x) const {
        if (x.rank() != 4 || x.shape[3] != in_c_)
            throw std::domain_error("Conv: bad input shape");
    }

    int in_c_, filters_, fh_, fw_;
    ParamBlock<T> weights_;  // [fh][fw][in_c][filters]
    ParamBlock<T> bias_;
    Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Batch normalization (per channel over batch and spatial dims)

template <typename T>
class BatchNorm : public Layer<T> {
public:
    static constexpr double kEps = 1e-5;
    static constexpr double kDecay = 0.9;  // running = decay*running + (1-decay)*batch

    explicit BatchNorm(int channels) : c_(channels) {
        gamma_.resize(static_cast<std::size_t>(channels));
        std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
        beta_.resize(static_cast<std::size_t>(channels));
        running_mean_.assign(static_cast<std::size_t>(channels), T(0));
        running_var_.assign(static_cast<std::size_t>(channels), T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng*) override {
        if (x.rank() != 4 || x.shape[3] != c_)
            throw std::domain_error("BatchNorm: bad input shape");
        const std::size_t m = x.numel() / static_cast<std::size_t>(c_);
        Tensor<T> y(x.shape);
        if (mode == Mode::train) {
            mean_.assign(c_, 0.0);
            var_.assign(c_, 0.0);
            for (std::size_t i = 0; i < x.data.size(); i += c_)
                for (int ch = 0; ch < c_; ++ch) mean_[ch] += x.data[i + ch];
            for (auto& v : mean_) v /= static_cast<double>(m);
            for (std::size_t i = 0; i < x.data.size(); i += c_)
                for (int ch = 0; ch < c_; ++ch) {
                    const double d = x.data[i + ch] - mean_[ch];
                    var_[ch] += d * d;
                }
            for (auto& v : var_) v /= static_cast<double>(m);
            inv_std_.resize(c_);
            for (int ch = 0; ch < c_; ++ch) inv_std_[ch] = 1.0 / std::sqrt(var_[ch] + kEps);
            for (int ch = 0; ch < c_; ++ch) {
                running_mean_[ch] = static_cast<T>(kDecay * running_mean_[ch] +
                                                   (1.0 - kDecay) * mean_[ch]);
                running_var_[ch] =
                    static_cast<T>(kDecay * running_var_[ch] + (1.0 - kDecay) * var_[ch]);
            }
            xhat_.resize(x.data.size());
            for (std::size_t i = 0; i < x.data.size(); i += c_)
                for (int ch = 0; ch < c_; ++ch) {
                    const double xh = (x.data[i + ch] - mean_[ch]) * inv_std_[ch];
                    xhat_[i + ch] = xh;
                    y.data[i + ch] =
                        static_cast<T>(gamma_.value[ch] * xh + beta_.value[ch]);
                }
            batch_count_ = m;
        } else {
            for (std::size_t i = 0; i < x.data.size(); i += c_)
                for (int ch = 0; ch < c_; ++ch) {
                    const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[ch]) + kEps);
                    y.data[i + ch] = static_cast<T>(
                        gamma_.value[ch] * (x.data[i + ch] - running_mean_[ch]) * inv +
                        beta_.value[ch]);
                }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const std::size_t m = batch_count_;
        std::vector<double> sum_g(c_, 0.0), sum_gx(c_, 0.0);
        for (std::size_t i = 0; i < g.data.size(); i += c_)
            for (int ch = 0; ch < c_; ++ch) {
                sum_g[ch] += g.data[i + ch];
                sum_gx[ch] += g.data[i + ch] * xhat_[i + ch];
            }
        for (int ch = 0; ch < c_; ++ch) {
            gamma_.grad[ch] = static_cast<T>(sum_gx[ch]);
            beta_.grad[ch] = static_cast<T>(sum_g[ch]);
        }
        Tensor<T> gx(g.shape);
        const double im = 1.0 / static_cast<double>(m);
        for (std::size_t i = 0; i < g.data.size(); i += c_)
            for (int ch = 0; ch < c_; ++ch) {
                const double t = g.data[i + ch] - im * sum_g[ch] -
                                 xhat_[i + ch] * im * sum_gx[ch];
                gx.data[i + ch] = static_cast<T>(gamma_.value[ch] * inv_std_[ch] * t);
            }
        return gx;
    }

    std::vector<ParamBlock<T>*> param_blocks() override { return {&gamma_, &beta_}; }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override {
        if (in[2] != c_) throw std::domain_error("BatchNorm: channel mismatch");
        return in;
    }

    std::vector<T>& running_mean() { return running_mean_; }
    std::vector<T>& running_var() { return running_var_; }

private:
    int c_;
    ParamBlock<T> gamma_, beta_;
    std::vector<T> running_mean_, running_var_;
    // train-time cache
    std::vector<double> mean_, var_, inv_std_, xhat_;
    std::size_t batch_count_ = 0;
};

// Functional form used on its own (and by tests): normalizes with batch
// statistics in train mode and updates running stats in place; infer mode
// requires previously established running statistics.
template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, const std::vector<T>& gamma,
                            const std::vector<T>& beta, Mode mode,
                            std::vector<T>& running_mean, std::vector<T>& running_var) {
    const int c = x.shape.back();
    if (static_cast<int>(gamma.size()) != c || static_cast<int>(beta.size()) != c)
        throw std::domain_error("batchnorm_forward: affine parameter length mismatch");
    if (mode == Mode::infer &&
        (running_mean.size() != static_cast<std::size_t>(c) ||
         running_var.size() != static_cast<std::size_t>(c)))
        throw std::domain_error("batchnorm_forward: no running statistics for infer mode");
    BatchNorm<T> bn(c);
    auto blocks = bn.param_blocks();
    blocks[0]->value = gamma;
    blocks[1]->value = beta;
    if (!running_mean.empty()) {
        bn.running_mean() = running_mean;
        bn.running_var() = running_var;
    }
    Tensor<T> y = bn.forward(x, mode, nullptr);
    if (mode == Mode::train) {
        running_mean = bn.running_mean();
        running_var = bn.running_var();
    }
    return y;
}

// ---------------------------------------------------------------------------
// ReLU

template <typename T>
class Relu : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode, Rng*) override {
        mask_.assign(x.data.size(), false);
        Tensor<T> y(x.shape);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const bool pos = x.data[i] > T(0);
            mask_[i] = pos;
            y.data[i] = pos ? x.data[i] : T(0);
        }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> gx(g.shape);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gx.data[i] = mask_[i] ? g.data[i] : T(0);
        return gx;
    }
    std::array<int, 3> out_shape(std::array<int, 3> in) const override { return in; }

private:
    std::vector<bool> mask_;
};

// ---------------------------------------------------------------------------
// Max pooling over non-overlapping windows; gradient goes to the argmax
// (first occurrence wins ties).

template <typename T>
class MaxPool : public Layer<T> {
public:
    MaxPool(int ph, int pw) : ph_(ph), pw_(pw) {
        if (ph <= 0 || pw <= 0) throw std::domain_error("MaxPool: bad pool shape");
    }

    Tensor<T> forward(const Tensor<T>& x, Mode, Rng*) override {
        if (x.shape[1] % ph_ != 0 || x.shape[2] % pw_ != 0)
            throw std::domain_error("MaxPool: spatial dims not divisible by pool shape");
        in_shape_ = x.shape;
        const int n = x.shape[0], oh = x.shape[1] / ph_, ow = x.shape[2] / pw_,
                  c = x.shape[3];
        Tensor<T> y(std::vector<int>{n, oh, ow, c});
        argmax_.resize(y.numel());
        for (int b = 0; b < n; ++b)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox)
                    for (int ch = 0; ch < c; ++ch) {
                        T best = x.at4(b, oy * ph_, ox * pw_, ch);
                        std::size_t best_i = x.idx4(b, oy * ph_, ox * pw_, ch);
                        for (int dy = 0; dy < ph_; ++dy)
                            for (int dx = 0; dx < pw_; ++dx) {
                                const std::size_t i =
                                    x.idx4(b, oy * ph_ + dy, ox * pw_ + dx, ch);
                                if (x.data[i] > best) {
                                    best = x.data[i];
                                    best_i = i;
                                }
                            }
                        const std::size_t o = y.idx4(b, oy, ox, ch);
                        y.data[o] = best;
                        argmax_[o] = best_i;
                    }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> gx(in_shape_);
        for (std::size_t o = 0; o < g.data.size(); ++o) gx.data[argmax_[o]] += g.data[o];
        return gx;
    }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override {
        if (in[0] % ph_ != 0 || in[1] % pw_ != 0)
            throw std::domain_error("MaxPool: spatial dims not divisible by pool shape");
        return {in[0] / ph_, in[1] / pw_, in[2]};
    }

private:
    int ph_, pw_;
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

// ---------------------------------------------------------------------------
// Inverted dropout: zero with probability rate, scale survivors by
// 1/(1-rate); identity at inference.

template <typename T>
class Dropout : public Layer<T> {
public:
    explicit Dropout(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) throw std::domain_error("Dropout: rate must be in [0,1)");
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng) override {
        if (mode == Mode::infer || rate_ == 0.0) {
            active_ = false;
            return x;
        }
        if (rng == nullptr) throw std::domain_error("Dropout: train mode needs an rng");
        active_ = true;
        keep_.assign(x.data.size(), false);
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        Tensor<T> y(x.shape);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const bool keep = rng->uniform() >= rate_;
            keep_[i] = keep;
            y.data[i] = keep ? x.data[i] * scale : T(0);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        if (!active_) return g;
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        Tensor<T> gx(g.shape);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gx.data[i] = keep_[i] ? g.data[i] * scale : T(0);
        return gx;
    }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override { return in; }

    double rate() const { return rate_; }

private:
    double rate_;
    bool active_ = false;
    std::vector<bool> keep_;
};

// ---------------------------------------------------------------------------
// Fully connected on flattened features: y = x W + b.

template <typename T>
class Dense : public Layer<T> {
public:
    Dense(int in_dim, int units) : in_dim_(in_dim), units_(units) {
        if (in_dim <= 0 || units <= 0) throw std::domain_error("Dense: bad dimensions");
        weights_.resize(static_cast<std::size_t>(in_dim) * units);
        weights_.weight_decay = true;
        bias_.resize(static_cast<std::size_t>(units));
    }

    void init(Rng& rng) {
        const double std_dev = std::sqrt(2.0 / static_cast<double>(in_dim_));
        for (auto& w : weights_.value) w = static_cast<T>(rng.gaussian() * std_dev);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode, Rng*) override {
        const int n = x.shape[0];
        if (static_cast<int>(x.numel()) / n != in_dim_)
            throw std::domain_error("Dense: input feature count mismatch");
        x_ = x;
        Tensor<T> y(std::vector<int>{n, units_});
        for (int b = 0; b < n; ++b) {
            const T* xp = x.ptr() + static_cast<std::size_t>(b) * in_dim_;
            T* yp = y.ptr() + static_cast<std::size_t>(b) * units_;
            for (int u = 0; u < units_; ++u) yp[u] = bias_.value[u];
            for (int i = 0; i < in_dim_; ++i) {
                const T xv = xp[i];
                const T* wr = weights_.value.data() + static_cast<std::size_t>(i) * units_;
                for (int u = 0; u < units_; ++u) yp[u] += xv * wr[u];
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const int n = x_.shape[0];
        std::fill(weights_.grad.begin(), weights_.grad.end(), T(0));
        std::fill(bias_.grad.begin(), bias_.grad.end(), T(0));
        Tensor<T> gx(x_.shape);
        for (int b = 0; b < n; ++b) {
            const T* xp = x_.ptr() + static_cast<std::size_t>(b) * in_dim_;
            const T* gp = g.ptr() + static_cast<std::size_t>(b) * units_;
            T* gxp = gx.ptr() + static_cast<std::size_t>(b) * in_dim_;
            for (int u = 0; u < units_; ++u) bias_.grad[u] += gp[u];
            for (int i = 0; i < in_dim_; ++i) {
                T* gwr = weights_.grad.data() + static_cast<std::size_t>(i) * units_;
                const T* wr = weights_.value.data() + static_cast<std::size_t>(i) * units_;
                const T xv = xp[i];
                T acc = T(0);
                for (int u = 0; u < units_; ++u) {
                    gwr[u] += xv * gp[u];
                    acc += wr[u] * gp[u];
                }
                gxp[i] = acc;
            }
        }
        return gx;
    }

    std::vector<ParamBlock<T>*> param_blocks() override { return {&weights_, &bias_}; }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override {
        if (in[0] * in[1] * in[2] != in_dim_)
            throw std::domain_error("Dense: input feature count mismatch");
        return {units_, 1, 1};
    }

    int units() const { return units_; }

private:
    int in_dim_, units_;
    ParamBlock<T> weights_;  // [in_dim][units]
    ParamBlock<T> bias_;
    Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Row-wise softmax over [n, classes].

template <typename T>
class Softmax : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode, Rng*) override {
        const int n = x.shape[0];
        const int c = static_cast<int>(x.numel()) / n;
        Tensor<T> y(std::vector<int>{n, c});
        for (int b = 0; b < n; ++b) {
            const T* xp = x.ptr() + static_cast<std::size_t>(b) * c;
            T* yp = y.ptr() + static_cast<std::size_t>(b) * c;
            T mx = xp[0];
            for (int i = 1; i < c; ++i) mx = std::max(mx, xp[i]);
            double sum = 0.0;
            for (int i = 0; i < c; ++i) {
                const double e = std::exp(static_cast<double>(xp[i] - mx));
                yp[i] = static_cast<T>(e);
                sum += e;
            }
            const T inv = static_cast<T>(1.0 / sum);
            for (int i = 0; i < c; ++i) yp[i] *= inv;
        }
        y_ = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const int n = y_.shape[0], c = y_.shape[1];
        Tensor<T> gx(y_.shape);
        for (int b = 0; b < n; ++b) {
            const T* yp = y_.ptr() + static_cast<std::size_t>(b) * c;
            const T* gp = g.ptr() + static_cast<std::size_t>(b) * c;
            double dot = 0.0;
            for (int i = 0; i < c; ++i) dot += static_cast<double>(yp[i]) * gp[i];
            T* gxp = gx.ptr() + static_cast<std::size_t>(b) * c;
            for (int i = 0; i < c; ++i)
                gxp[i] = static_cast<T>(yp[i] * (gp[i] - dot));
        }
        return gx;
    }

    std::array<int, 3> out_shape(std::array<int, 3> in) const override {
        return {in[0] * in[1] * in[2], 1, 1};
    }

private:
    Tensor<T> y_;
};

}  // namespace hybnet::nn
