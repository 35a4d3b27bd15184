#pragma once

// SGD-with-momentum training: shuffled minibatches, a step learning-rate
// schedule, and L2 regularization on weight matrices (not biases or
// batch-norm affine parameters).

#include <cstdio>
#include <functional>

#include "hybnet/nn/network.hpp"

namespace hybnet::nn {

struct TrainingConfig {
    double lr_initial = 0.0;  // 0 -> take NetworkSpec::initial_lr
    double momentum = 0.9;
    int epochs = 60;
    int lr_drop_epoch = 40;      // drop every this many epochs
    double lr_drop_factor = 0.1;
    int minibatch = 256;
    double l2 = 1e-4;
    std::uint64_t rng_seed = 0;
    bool verbose = false;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double lr = 0.0;
    double val_accuracy = -1.0;  // -1 when no validation set was given
};

struct TrainResult {
    std::vector<EpochStats> history;
};

struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(int epoch_idx)
        : std::runtime_error("training diverged (loss is not finite) at epoch " +
                             std::to_string(epoch_idx)),
          epoch(epoch_idx) {}
    int epoch;
};

// One momentum update over flat arrays: v <- momentum*v - lr*(g + l2*w);
// w <- w + v. Pass l2 = 0 for parameters exempt from weight decay.
template <typename T>
void sgdm_step(T* params, const T* grads, T* velocity, std::size_t n, double lr,
               double momentum, double l2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = static_cast<double>(grads[i]) + l2 * static_cast<double>(params[i]);
        const double v = momentum * static_cast<double>(velocity[i]) - lr * g;
        velocity[i] = static_cast<T>(v);
        params[i] = static_cast<T>(params[i] + v);
    }
}

template <typename T>
void sgdm_step(ParamBlock<T>& block, double lr, double momentum, double l2) {
    sgdm_step(block.value.data(), block.grad.data(), block.velocity.data(),
              block.value.size(), lr, momentum, l2 * (block.weight_decay ? 1.0 : 0.0));
}

// Numerically stable fused softmax + mean cross-entropy. Returns the loss,
// the row-stochastic probabilities, and d(loss)/d(logits).
template <typename T>
struct SoftmaxXent {
    double loss = 0.0;
    Tensor<T> probs;
    Tensor<T> grad_logits;
};

template <typename T>
SoftmaxXent<T> softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels) {
    const int n = logits.shape[0];
    const int c = static_cast<int>(logits.numel()) / n;
    if (static_cast<int>(labels.size()) != n)
        throw std::domain_error("softmax_xent: label count mismatch");
    SoftmaxXent<T> out;
    out.probs = Tensor<T>(std::vector<int>{n, c});
    out.grad_logits = Tensor<T>(std::vector<int>{n, c});
    double loss = 0.0;
    for (int b = 0; b < n; ++b) {
        if (labels[b] < 0 || labels[b] >= c)
            throw std::domain_error("softmax_xent: label out of range");
        const T* xp = logits.ptr() + static_cast<std::size_t>(b) * c;
        T* pp = out.probs.ptr() + static_cast<std::size_t>(b) * c;
        double mx = xp[0];
        for (int i = 1; i < c; ++i) mx = std::max(mx, static_cast<double>(xp[i]));
        double sum = 0.0;
        for (int i = 0; i < c; ++i) {
            const double e = std::exp(static_cast<double>(xp[i]) - mx);
            pp[i] = static_cast<T>(e);
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (int i = 0; i < c; ++i) pp[i] = static_cast<T>(pp[i] * inv);
        const double p_true = std::max(static_cast<double>(pp[labels[b]]), 1e-300);
        loss -= std::log(p_true);
        T* gp = out.grad_logits.ptr() + static_cast<std::size_t>(b) * c;
        const T invn = static_cast<T>(1.0 / n);
        for (int i = 0; i < c; ++i)
            gp[i] = (pp[i] - (i == labels[b] ? T(1) : T(0))) * invn;
    }
    out.loss = loss / n;
    return out;
}

// Affine layer + softmax + mean cross-entropy in one call.
// x: [n, d] (or [n,h,w,c], flattened), w: [d, units] row-major, b: [units].
template <typename T>
std::pair<double, Tensor<T>> dense_softmax_xent(const Tensor<T>& x, const Tensor<T>& w,
                                                const std::vector<T>& b,
                                                const std::vector<int>& labels) {
    const int n = x.shape[0];
    const int d = static_cast<int>(x.numel()) / n;
    if (w.rank() != 2 || w.shape[0] != d)
        throw std::domain_error("dense_softmax_xent: weight shape mismatch");
    const int units = w.shape[1];
    if (static_cast<int>(b.size()) != units)
        throw std::domain_error("dense_softmax_xent: bias length mismatch");
    Tensor<T> logits(std::vector<int>{n, units});
    for (int r = 0; r < n; ++r) {
        const T* xp = x.ptr() + static_cast<std::size_t>(r) * d;
        T* yp = logits.ptr() + static_cast<std::size_t>(r) * units;
        for (int u = 0; u < units; ++u) yp[u] = b[static_cast<std::size_t>(u)];
        for (int i = 0; i < d; ++i) {
            const T xv = xp[i];
            const T* wr = w.ptr() + static_cast<std::size_t>(i) * units;
            for (int u = 0; u < units; ++u) yp[u] += xv * wr[u];
        }
    }
    auto sx = softmax_xent(logits, labels);
    return {sx.loss, std::move(sx.probs)};
}

// Learning rate at a 1-based epoch index under the step schedule.
inline double scheduled_lr(double lr_initial, int epoch, int drop_epoch, double drop_factor) {
    const int drops = (epoch - 1) / drop_epoch;
    double lr = lr_initial;
    for (int i = 0; i < drops; ++i) lr *= drop_factor;
    return lr;
}

template <typename T>
double accuracy(Network<T>& net, const Tensor<T>& x, const std::vector<int>& labels,
                int chunk = 256) {
    const int n = x.shape[0];
    std::size_t hits = 0;
    for (int start = 0; start < n; start += chunk) {
        const int bsz = std::min(chunk, n - start);
        std::vector<std::size_t> rows(static_cast<std::size_t>(bsz));
        for (int i = 0; i < bsz; ++i) rows[static_cast<std::size_t>(i)] =
            static_cast<std::size_t>(start + i);
        Tensor<T> bx = gather_rows(x, rows);
        Tensor<T> probs = net.forward(bx, Mode::infer);
        const int c = probs.shape[1];
        for (int b = 0; b < bsz; ++b) {
            const T* pp = probs.ptr() + static_cast<std::size_t>(b) * c;
            int best = 0;
            for (int k = 1; k < c; ++k)
                if (pp[k] > pp[best]) best = k;
            if (best == labels[static_cast<std::size_t>(start + b)]) ++hits;
        }
    }
    return static_cast<double>(hits) / n;
}

// Train in place. x is [count, h, w, c]; optional validation set is scored in
// infer mode after every epoch. Single-threaded and bit-deterministic for a
// given seed.
template <typename T>
TrainResult train(Network<T>& net, const Tensor<T>& x, const std::vector<int>& labels,
                  const TrainingConfig& cfg, const Tensor<T>* val_x = nullptr,
                  const std::vector<int>* val_labels = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = nullptr) {
    const int count = x.shape[0];
    if (count <= 0 || static_cast<int>(labels.size()) != count)
        throw std::domain_error("train: data/label mismatch");
    const double lr0 = cfg.lr_initial > 0.0 ? cfg.lr_initial : net.spec().initial_lr;
    Rng rng = Rng(cfg.rng_seed).split(0x7261696Eull);

    std::vector<std::size_t> order(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    auto blocks = net.param_blocks();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = scheduled_lr(lr0, epoch, cfg.lr_drop_epoch, cfg.lr_drop_factor);
        // Fisher-Yates shuffle
        for (std::size_t i = order.size(); i-- > 1;) {
            const std::size_t j = rng.uniform_int(i + 1);
            std::swap(order[i], order[j]);
        }
        double loss_sum = 0.0;
        int batches = 0;
        for (int start = 0; start < count; start += cfg.minibatch) {
            const int bsz = std::min(cfg.minibatch, count - start);
            std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + bsz);
            Tensor<T> bx = gather_rows(x, rows);
            std::vector<int> by(static_cast<std::size_t>(bsz));
            for (int i = 0; i < bsz; ++i) by[static_cast<std::size_t>(i)] = labels[rows[i]];

            Tensor<T> logits = net.forward_logits(bx, Mode::train, &rng);
            auto sx = softmax_xent(logits, by);
            if (!std::isfinite(sx.loss)) throw TrainingDiverged(epoch);
            net.backward_from_logits(sx.grad_logits);
            for (auto* blk : blocks) sgdm_step(*blk, lr, cfg.momentum, cfg.l2);
            loss_sum += sx.loss;
            ++batches;
        }
        EpochStats st;
        st.epoch = epoch;
        st.mean_loss = loss_sum / batches;
        st.lr = lr;
        if (val_x != nullptr && val_labels != nullptr)
            st.val_accuracy = accuracy(net, *val_x, *val_labels);
        if (cfg.verbose) {
            std::fprintf(stderr, "epoch %3d  lr %.5g  loss %.5f", st.epoch, st.lr,
                         st.mean_loss);
            if (st.val_accuracy >= 0.0)
                std::fprintf(stderr, "  val_acc %.4f", st.val_accuracy);
            std::fprintf(stderr, "\n");
        }
        if (on_epoch) on_epoch(st);
        result.history.push_back(st);
    }
    return result;
}

}  // namespace hybnet::nn
