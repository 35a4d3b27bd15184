#pragma once

// Declarative layer stacks and the runnable network built from them.

#include <memory>
#include <string>

#include "hybnet/nn/layers.hpp"

namespace hybnet::nn {

enum class LayerKind : std::uint8_t {
    conv = 0,
    batchnorm = 1,
    relu = 2,
    maxpool = 3,
    dropout = 4,
    dense = 5,
    softmax = 6,
};

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int filters = 0, fh = 0, fw = 0;  // conv
    int ph = 0, pw = 0;               // maxpool
    double rate = 0.0;                // dropout
    int units = 0;                    // dense

    static LayerSpec conv(int filters, int fh, int fw) {
        LayerSpec s;
        s.kind = LayerKind::conv;
        s.filters = filters;
        s.fh = fh;
        s.fw = fw;
        return s;
    }
    static LayerSpec batchnorm() { return {LayerKind::batchnorm}; }
    static LayerSpec relu() { return {LayerKind::relu}; }
    static LayerSpec maxpool(int ph, int pw) {
        LayerSpec s;
        s.kind = LayerKind::maxpool;
        s.ph = ph;
        s.pw = pw;
        return s;
    }
    static LayerSpec dropout(double rate) {
        LayerSpec s;
        s.kind = LayerKind::dropout;
        s.rate = rate;
        return s;
    }
    static LayerSpec dense(int units) {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.units = units;
        return s;
    }
    static LayerSpec softmax() { return {LayerKind::softmax}; }
};

struct NetworkSpec {
    std::array<int, 3> input_shape{0, 0, 0};  // h, w, c
    std::vector<LayerSpec> layers;
    double initial_lr = 0.01;

    // Output shape of every layer in order; throws if any layer cannot accept
    // its predecessor's output.
    std::vector<std::array<int, 3>> infer_shapes() const {
        std::vector<std::array<int, 3>> shapes;
        std::array<int, 3> cur = input_shape;
        for (const auto& ls : layers) {
            switch (ls.kind) {
                case LayerKind::conv:
                    cur = Conv<float>(cur[2], ls.filters, ls.fh, ls.fw).out_shape(cur);
                    break;
                case LayerKind::batchnorm:
                    cur = BatchNorm<float>(cur[2]).out_shape(cur);
                    break;
                case LayerKind::relu:
                    break;
                case LayerKind::maxpool:
                    cur = MaxPool<float>(ls.ph, ls.pw).out_shape(cur);
                    break;
                case LayerKind::dropout:
                    if (ls.rate < 0.0 || ls.rate >= 1.0)
                        throw std::domain_error("NetworkSpec: dropout rate out of range");
                    break;
                case LayerKind::dense:
                    cur = Dense<float>(cur[0] * cur[1] * cur[2], ls.units).out_shape(cur);
                    break;
                case LayerKind::softmax:
                    cur = {cur[0] * cur[1] * cur[2], 1, 1};
                    break;
            }
            shapes.push_back(cur);
        }
        return shapes;
    }

    int num_classes() const {
        for (auto it = layers.rbegin(); it != layers.rend(); ++it)
            if (it->kind == LayerKind::dense) return it->units;
        throw std::domain_error("NetworkSpec: no dense layer");
    }
};

struct Prediction {
    int class_index = 0;
    std::vector<float> probabilities;
};

template <typename T>
class Network {
public:
    // Builds the layer stack and initializes parameters: He-normal weights,
    // zero biases, identity batch-norm affine.
    Network(NetworkSpec spec, Rng& init_rng) : spec_(std::move(spec)) {
        if (spec_.layers.empty() || spec_.layers.back().kind != LayerKind::softmax)
            throw std::domain_error("Network: last layer must be softmax");
        spec_.infer_shapes();  // validate
        std::array<int, 3> cur = spec_.input_shape;
        for (const auto& ls : spec_.layers) {
            switch (ls.kind) {
                case LayerKind::conv: {
                    auto l = std::make_unique<Conv<T>>(cur[2], ls.filters, ls.fh, ls.fw);
                    l->init(init_rng);
                    cur = l->out_shape(cur);
                    layers_.push_back(std::move(l));
                    break;
                }
                case LayerKind::batchnorm:
                    layers_.push_back(std::make_unique<BatchNorm<T>>(cur[2]));
                    break;
                case LayerKind::relu:
                    layers_.push_back(std::make_unique<Relu<T>>());
                    break;
                case LayerKind::maxpool: {
                    auto l = std::make_unique<MaxPool<T>>(ls.ph, ls.pw);
                    cur = l->out_shape(cur);
                    layers_.push_back(std::move(l));
                    break;
                }
                case LayerKind::dropout:
                    layers_.push_back(std::make_unique<Dropout<T>>(ls.rate));
                    break;
                case LayerKind::dense: {
                    auto l = std::make_unique<Dense<T>>(cur[0] * cur[1] * cur[2], ls.units);
                    l->init(init_rng);
                    cur = l->out_shape(cur);
                    layers_.push_back(std::move(l));
                    break;
                }
                case LayerKind::softmax:
                    layers_.push_back(std::make_unique<Softmax<T>>());
                    break;
            }
        }
    }

    const NetworkSpec& spec() const { return spec_; }

    // Full forward pass including the final softmax.
    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng* rng = nullptr) {
        check_batch(x);
        Tensor<T> cur = x;
        for (auto& l : layers_) cur = l->forward(cur, mode, rng);
        return cur;
    }

    // Forward through everything but the final softmax (training path; the
    // loss fuses softmax and cross-entropy).
    Tensor<T> forward_logits(const Tensor<T>& x, Mode mode, Rng* rng) {
        check_batch(x);
        Tensor<T> cur = x;
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
            cur = layers_[i]->forward(cur, mode, rng);
        return cur;
    }

    // Backward from d(loss)/d(logits); fills every layer's parameter grads.
    void backward_from_logits(const Tensor<T>& grad_logits) {
        Tensor<T> g = grad_logits;
        for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
    }

    Prediction predict(const Tensor<T>& sample) {
        Tensor<T> x = sample;
        if (x.rank() == 3) {
            x.shape = {1, sample.shape[0], sample.shape[1], sample.shape[2]};
        } else if (x.rank() != 4 || x.shape[0] != 1) {
            throw std::domain_error("predict: expected one [h,w,c] sample");
        }
        Tensor<T> probs = forward(x, Mode::infer);
        Prediction p;
        p.probabilities.resize(probs.numel());
        int best = 0;
        for (std::size_t i = 0; i < probs.numel(); ++i) {
            p.probabilities[i] = static_cast<float>(probs.data[i]);
            if (probs.data[i] > probs.data[static_cast<std::size_t>(best)])
                best = static_cast<int>(i);
        }
        p.class_index = best;
        return p;
    }

    std::vector<ParamBlock<T>*> param_blocks() {
        std::vector<ParamBlock<T>*> out;
        for (auto& l : layers_)
            for (auto* b : l->param_blocks()) out.push_back(b);
        return out;
    }

    // Batch-norm layers in declaration order (for checkpointing).
    std::vector<BatchNorm<T>*> batchnorm_layers() {
        std::vector<BatchNorm<T>*> out;
        for (auto& l : layers_)
            if (auto* bn = dynamic_cast<BatchNorm<T>*>(l.get())) out.push_back(bn);
        return out;
    }

private:
    void check_batch(const Tensor<T>& x) const {
        if (x.rank() != 4 || x.shape[1] != spec_.input_shape[0] ||
            x.shape[2] != spec_.input_shape[1] || x.shape[3] != spec_.input_shape[2])
            throw std::domain_error("Network: input shape mismatch");
    }

    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace hybnet::nn
