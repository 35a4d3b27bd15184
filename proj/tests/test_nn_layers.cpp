#include "doctest.h"
#include "hybnet/nn/train.hpp"
#include "testutil.hpp"

using namespace hybnet;
using namespace hybnet::nn;

namespace {

// Nested-loop cross-correlation oracle with 'same' zero padding, stride 1.
Tensor<double> conv_oracle(const Tensor<double>& x, const std::vector<double>& w,
                           const std::vector<double>& bias, int fh, int fw, int in_c,
                           int filters) {
    const int n = x.shape[0], h = x.shape[1], ww = x.shape[2];
    Tensor<double> y(std::vector<int>{n, h, ww, filters});
    const int ph = fh / 2, pw = fw / 2;
    for (int b = 0; b < n; ++b)
        for (int oy = 0; oy < h; ++oy)
            for (int ox = 0; ox < ww; ++ox)
                for (int f = 0; f < filters; ++f) {
                    double acc = bias[static_cast<std::size_t>(f)];
                    for (int dy = 0; dy < fh; ++dy)
                        for (int dx = 0; dx < fw; ++dx) {
                            const int iy = oy + dy - ph, ix = ox + dx - pw;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                            for (int ci = 0; ci < in_c; ++ci)
                                acc += x.at4(b, iy, ix, ci) *
                                       w[((static_cast<std::size_t>(dy) * fw + dx) * in_c +
                                          ci) * filters + f];
                        }
                    y.at4(b, oy, ox, f) = acc;
                }
    return y;
}

Tensor<double> rand_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data) v = scale * rng.gaussian();
    return t;
}

}  // namespace

TEST_CASE("conv: 1x1 identity kernel with zero bias passes input through") {
    Conv<double> conv(1, 1, 1, 1);
    conv.param_blocks()[0]->value[0] = 1.0;
    Rng rng(5);
    Tensor<double> x = rand_tensor({2, 6, 3, 1}, rng);
    const Tensor<double> y = conv.forward(x, Mode::train, nullptr);
    for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == x.data[i]);

    // gradient of an identity conv w.r.t. input equals the upstream gradient
    Tensor<double> g = rand_tensor(std::vector<int>(y.shape), rng);
    const Tensor<double> gx = conv.backward(g);
    for (std::size_t i = 0; i < g.data.size(); ++i) CHECK(gx.data[i] == g.data[i]);
}

TEST_CASE("conv: hand-computed 3x1 box kernel with same padding") {
    Conv<double> conv(1, 1, 3, 1);
    auto* w = conv.param_blocks()[0];
    w->value = {1.0, 1.0, 1.0};
    Tensor<double> x(std::vector<int>{1, 6, 1, 1});
    x.data = {0, 1, 0, 0, 0, 0};
    const Tensor<double> y = conv.forward(x, Mode::train, nullptr);
    const std::vector<double> want = {1, 1, 1, 0, 0, 0};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(y.data[i] == want[i]);
}

TEST_CASE("conv matches the nested-loop oracle on random cases") {
    Rng rng(31);
    for (int t = 0; t < 8; ++t) {
        const int in_c = 1 + static_cast<int>(rng.uniform_int(3));
        const int filters = 1 + static_cast<int>(rng.uniform_int(4));
        const int fh = 1 + 2 * static_cast<int>(rng.uniform_int(3));
        const int h = 4 + static_cast<int>(rng.uniform_int(6));
        Conv<double> conv(in_c, filters, fh, 1);
        conv.init(rng);
        Tensor<double> x = rand_tensor({2, h, 1, in_c}, rng);
        const Tensor<double> got = conv.forward(x, Mode::train, nullptr);
        const Tensor<double> want =
            conv_oracle(x, conv.param_blocks()[0]->value, conv.param_blocks()[1]->value,
                        fh, 1, in_c, filters);
        for (std::size_t i = 0; i < want.data.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-6));
    }
    // the specific case called out as an example: 5x1x2 input, 3 filters 3x1
    Conv<double> conv(2, 3, 3, 1);
    conv.init(rng);
    Tensor<double> x = rand_tensor({1, 5, 1, 2}, rng);
    const Tensor<double> got = conv.forward(x, Mode::train, nullptr);
    const Tensor<double> want =
        conv_oracle(x, conv.param_blocks()[0]->value, conv.param_blocks()[1]->value, 3, 1,
                    2, 3);
    for (std::size_t i = 0; i < want.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-6));
}

TEST_CASE("conv rejects bad shapes") {
    CHECK_THROWS_AS(Conv<double>(1, 1, 2, 1), std::domain_error);  // even filter
    Conv<double> conv(2, 1, 3, 1);
    Tensor<double> x(std::vector<int>{1, 4, 1, 3});  // channel mismatch
    CHECK_THROWS_AS((void)conv.forward(x, Mode::train, nullptr), std::domain_error);
}

TEST_CASE("conv backward: zero upstream gradient gives zero gradients") {
    Rng rng(77);
    Conv<double> conv(2, 3, 5, 1);
    conv.init(rng);
    Tensor<double> x = rand_tensor({2, 8, 1, 2}, rng);
    const Tensor<double> y = conv.forward(x, Mode::train, nullptr);
    Tensor<double> zeros(std::vector<int>(y.shape));
    const Tensor<double> gx = conv.backward(zeros);
    for (double v : gx.data) CHECK(v == 0.0);
    for (auto* blk : conv.param_blocks())
        for (double v : blk->grad) CHECK(v == 0.0);
}

TEST_CASE("batchnorm: train mode normalizes to zero mean and unit variance") {
    BatchNorm<double> bn(3);
    Rng rng(13);
    Tensor<double> x = rand_tensor({8, 4, 1, 3}, rng, 2.5);
    for (auto& v : x.data) v += 4.0;
    const Tensor<double> y = bn.forward(x, Mode::train, nullptr);
    const std::size_t m = y.data.size() / 3;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < y.data.size(); i += 3) mean += y.data[i + c];
        mean /= static_cast<double>(m);
        for (std::size_t i = 0; i < y.data.size(); i += 3) {
            const double d = y.data[i + c] - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        CHECK(std::abs(mean) < 1e-6);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("batchnorm: a batch of identical samples collapses to zero") {
    BatchNorm<double> bn(2);
    Tensor<double> x(std::vector<int>{4, 3, 1, 2});
    for (std::size_t i = 0; i < x.data.size(); i += 2) {
        x.data[i] = 5.0;
        x.data[i + 1] = -2.0;
    }
    const Tensor<double> y = bn.forward(x, Mode::train, nullptr);
    for (double v : y.data) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("batchnorm: running statistics update with decay 0.9") {
    BatchNorm<double> bn(1);
    Tensor<double> x(std::vector<int>{2, 2, 1, 1});
    x.data = {1.0, 3.0, 5.0, 7.0};  // mean 4, biased var 5
    (void)bn.forward(x, Mode::train, nullptr);
    CHECK(bn.running_mean()[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 4.0).epsilon(1e-12));
    CHECK(bn.running_var()[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 5.0).epsilon(1e-12));
}

TEST_CASE("batchnorm functional op: infer without statistics is an error") {
    Tensor<double> x(std::vector<int>{2, 2, 1, 1});
    x.data = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> gamma = {1.0}, beta = {0.0};
    std::vector<double> mean, var;  // none yet
    CHECK_THROWS_AS(
        (void)batchnorm_forward(x, gamma, beta, Mode::infer, mean, var),
        std::domain_error);
    // train mode establishes them, after which infer works
    (void)batchnorm_forward(x, gamma, beta, Mode::train, mean, var);
    REQUIRE(mean.size() == 1);
    const Tensor<double> y = batchnorm_forward(x, gamma, beta, Mode::infer, mean, var);
    CHECK(y.data.size() == x.data.size());
}

TEST_CASE("maxpool: forward and gradient routing") {
    MaxPool<double> pool(2, 1);
    Tensor<double> x(std::vector<int>{1, 4, 1, 1});
    x.data = {1, 3, 2, 8};
    const Tensor<double> y = pool.forward(x, Mode::train, nullptr);
    REQUIRE(y.data.size() == 2);
    CHECK(y.data[0] == 3.0);
    CHECK(y.data[1] == 8.0);

    Tensor<double> g(std::vector<int>(y.shape));
    g.data = {1, 1};
    const Tensor<double> gx = pool.backward(g);
    const std::vector<double> want = {0, 1, 0, 1};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(gx.data[i] == want[i]);

    Tensor<double> odd(std::vector<int>{1, 5, 1, 1});
    CHECK_THROWS_AS((void)pool.forward(odd, Mode::train, nullptr), std::domain_error);
}

TEST_CASE("maxpool matches a loop oracle and ties go to the first occurrence") {
    Rng rng(3);
    MaxPool<double> pool(2, 1);
    Tensor<double> x = rand_tensor({3, 8, 2, 4}, rng);
    const Tensor<double> y = pool.forward(x, Mode::train, nullptr);
    for (int b = 0; b < 3; ++b)
        for (int oy = 0; oy < 4; ++oy)
            for (int ox = 0; ox < 2; ++ox)
                for (int c = 0; c < 4; ++c)
                    CHECK(y.at4(b, oy, ox, c) ==
                          std::max(x.at4(b, 2 * oy, ox, c), x.at4(b, 2 * oy + 1, ox, c)));

    Tensor<double> tie(std::vector<int>{1, 2, 1, 1});
    tie.data = {4.0, 4.0};
    (void)pool.forward(tie, Mode::train, nullptr);
    Tensor<double> g1(std::vector<int>{1, 1, 1, 1});
    g1.data = {1.0};
    const Tensor<double> gt = pool.backward(g1);
    CHECK(gt.data[0] == 1.0);  // first occurrence wins
    CHECK(gt.data[1] == 0.0);
}

TEST_CASE("dropout: identity cases and train-mode statistics") {
    Rng rng(8);
    Dropout<double> d0(0.0);
    Tensor<double> x = rand_tensor({2, 10, 1, 3}, rng);
    const Tensor<double> y0 = d0.forward(x, Mode::train, &rng);
    for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(y0.data[i] == x.data[i]);

    Dropout<double> d5(0.5);
    const Tensor<double> yi = d5.forward(x, Mode::infer, nullptr);
    for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(yi.data[i] == x.data[i]);

    Tensor<double> big(std::vector<int>{1, 1000000, 1, 1});
    for (auto& v : big.data) v = 1.0;
    const Tensor<double> yt = d5.forward(big, Mode::train, &rng);
    std::size_t survivors = 0;
    double sum = 0.0;
    for (double v : yt.data) {
        if (v != 0.0) ++survivors;
        sum += v;
    }
    CHECK(static_cast<double>(survivors) / big.data.size() ==
          doctest::Approx(0.5).epsilon(0.004));
    CHECK(sum / static_cast<double>(big.data.size()) == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS_AS(Dropout<double>(1.0), std::domain_error);
    CHECK_THROWS_AS((void)d5.forward(x, Mode::train, nullptr), std::domain_error);
}

TEST_CASE("dense_softmax_xent: analytic values and probability rows") {
    // uniform logits: loss is ln(l)
    Tensor<double> x(std::vector<int>{2, 3});
    x.data = {0.4, 0.4, 0.4, -1.0, -1.0, -1.0};
    Tensor<double> w(std::vector<int>{3, 5});
    std::vector<double> b(5, 0.0);
    auto [loss_u, probs_u] = dense_softmax_xent(x, w, b, {0, 3});
    CHECK(loss_u == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    for (int r = 0; r < 2; ++r) {
        double s = 0.0;
        for (int c = 0; c < 5; ++c) s += probs_u.data[static_cast<std::size_t>(r * 5 + c)];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }

    // a +1000 logit on the true class drives the loss to zero
    Tensor<double> big(std::vector<int>{1, 4});
    big.data = {0.0, 1000.0, 0.0, 0.0};
    Tensor<double> id(std::vector<int>{4, 4});
    for (int i = 0; i < 4; ++i) id.data[static_cast<std::size_t>(i * 4 + i)] = 1.0;
    std::vector<double> zb(4, 0.0);
    auto [loss_hot, probs_hot] = dense_softmax_xent(big, id, zb, {1});
    CHECK(loss_hot == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(probs_hot.data[1] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)dense_softmax_xent(big, id, zb, {4}), std::domain_error);
    CHECK_THROWS_AS((void)dense_softmax_xent(big, id, zb, {-1}), std::domain_error);
}

TEST_CASE("gradient suite: every layer passes central differences over random shapes") {
    // 64-bit engine, eps 1e-5, max relative error < 1e-4; kink layers get
    // inputs held away from their switching points
    testutil::GradCheck gc;
    Rng rng(2025);

    for (int t = 0; t < 6; ++t) {  // conv
        const int in_c = 1 + static_cast<int>(rng.uniform_int(3));
        const int filters = 1 + static_cast<int>(rng.uniform_int(4));
        const int fh = 1 + 2 * static_cast<int>(rng.uniform_int(4));
        Conv<double> conv(in_c, filters, fh, 1);
        conv.init(rng);
        Tensor<double> x = rand_tensor({2, 4 + static_cast<int>(rng.uniform_int(8)), 1, in_c}, rng);
        gc.run(conv, x, 1000 + t);
    }
    {   // 2-D conv
        Conv<double> conv(2, 3, 3, 3);
        conv.init(rng);
        Tensor<double> x = rand_tensor({2, 5, 6, 2}, rng);
        gc.run(conv, x, 1100);
    }
    for (int t = 0; t < 5; ++t) {  // batchnorm
        const int c = 1 + static_cast<int>(rng.uniform_int(5));
        BatchNorm<double> bn(c);
        auto blocks = bn.param_blocks();
        for (auto& v : blocks[0]->value) v = 0.5 + rng.uniform();
        for (auto& v : blocks[1]->value) v = rng.gaussian();
        Tensor<double> x = rand_tensor({3, 2 + static_cast<int>(rng.uniform_int(5)), 2, c}, rng);
        for (auto& v : x.data) v = 2.0 * v + 1.0;
        gc.run(bn, x, 2000 + t);
    }
    for (int t = 0; t < 4; ++t) {  // relu, inputs kept off the kink
        Relu<double> relu;
        Tensor<double> x = rand_tensor({2, 6, 1, 3}, rng);
        for (auto& v : x.data)
            if (std::abs(v) < 1e-3) v = 0.25;
        gc.run(relu, x, 3000 + t);
    }
    for (int t = 0; t < 4; ++t) {  // maxpool, distinct window values
        MaxPool<double> pool(2, 1);
        Tensor<double> x(std::vector<int>{2, 8, 2, 2});
        for (std::size_t i = 0; i < x.data.size(); ++i)
            x.data[i] = static_cast<double>((i * 37 + t * 11) % 101) / 7.0;
        gc.run(pool, x, 4000 + t);
    }
    for (int t = 0; t < 5; ++t) {  // dense
        const int d = 2 + static_cast<int>(rng.uniform_int(10));
        const int u = 1 + static_cast<int>(rng.uniform_int(6));
        Dense<double> dense(d, u);
        dense.init(rng);
        Tensor<double> x = rand_tensor({3, d, 1, 1}, rng);
        gc.run(dense, x, 5000 + t);
    }
    {   // softmax layer (general Jacobian backward)
        Softmax<double> sm;
        Tensor<double> x = rand_tensor({3, 6, 1, 1}, rng);
        x.shape = {3, 6};
        gc.run(sm, x, 6000);
    }

    INFO("checked ", gc.entries, " derivative entries");
    CHECK(gc.entries > 500);
    CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("fused softmax cross-entropy gradient matches finite differences") {
    Rng rng(606);
    double max_rel = 0.0;
    for (int t = 0; t < 5; ++t) {
        const int n = 3, c = 2 + static_cast<int>(rng.uniform_int(6));
        Tensor<double> logits(std::vector<int>{n, c});
        for (auto& v : logits.data) v = 2.0 * rng.gaussian();
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(rng.uniform_int(c));
        const auto sx = softmax_xent(logits, labels);
        const double eps = 1e-6;
        for (std::size_t i = 0; i < logits.data.size(); ++i) {
            const double orig = logits.data[i];
            logits.data[i] = orig + eps;
            const double lp = softmax_xent(logits, labels).loss;
            logits.data[i] = orig - eps;
            const double lm = softmax_xent(logits, labels).loss;
            logits.data[i] = orig;
            max_rel = std::max(max_rel,
                               testutil::rel_err((lp - lm) / (2 * eps), sx.grad_logits.data[i]));
        }
    }
    CHECK(max_rel < 1e-4);
}
