#include "doctest.h"
#include "hybnet/models.hpp"
#include "testutil.hpp"

using namespace hybnet;
using namespace hybnet::models;

namespace {
const phy::LoraParams kP = phy::LoraParams::sf7_125k();

int count_layers(const nn::NetworkSpec& spec, nn::LayerKind kind) {
    int n = 0;
    for (const auto& ls : spec.layers)
        if (ls.kind == kind) ++n;
    return n;
}

// parameter count of the dense layer (weights + bias) given the spec shapes
long dense_params(const nn::NetworkSpec& spec) {
    const auto shapes = spec.infer_shapes();
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        if (spec.layers[i].kind == nn::LayerKind::dense) {
            const auto in = shapes[i - 1];
            return static_cast<long>(in[0]) * in[1] * in[2] * spec.layers[i].units +
                   spec.layers[i].units;
        }
    return -1;
}
}  // namespace

TEST_CASE("modality shapes match the published input dimensions") {
    CHECK(modality_shape(Modality::iq, kP) == std::array<int, 3>{128, 1, 2});
    CHECK(modality_shape(Modality::stft, kP) == std::array<int, 3>{64, 65, 2});
    CHECK(modality_shape(Modality::fft, kP) == std::array<int, 3>{128, 1, 1});
}

TEST_CASE("featurize: iq channels are the raw parts") {
    Rng rng(6);
    phy::IqSymbol r = phy::modulate_symbol(17, kP);
    for (auto& v : r.samples) v += 0.1 * rng.cgaussian();
    const nn::TensorF t = featurize(r, Modality::iq, kP);
    REQUIRE(t.shape == std::vector<int>{128, 1, 2});
    for (int n = 0; n < 128; ++n) {
        CHECK(t.data[static_cast<std::size_t>(2 * n)] ==
              static_cast<float>(r.samples[static_cast<std::size_t>(n)].real()));
        CHECK(t.data[static_cast<std::size_t>(2 * n + 1)] ==
              static_cast<float>(r.samples[static_cast<std::size_t>(n)].imag()));
    }
}

TEST_CASE("featurize: stft of a zero symbol is all zero") {
    phy::IqSymbol zeros;
    zeros.samples.assign(128, cplx(0.0, 0.0));
    const nn::TensorF t = featurize(zeros, Modality::stft, kP);
    REQUIRE(t.shape == std::vector<int>{64, 65, 2});
    for (float v : t.data) CHECK(v == 0.0f);
}

TEST_CASE("featurize: fft feature of a clean symbol peaks at the value with N") {
    for (int m : {0, 31, 64, 127}) {
        const nn::TensorF t = featurize(phy::modulate_symbol(m, kP), Modality::fft, kP);
        REQUIRE(t.shape == std::vector<int>{128, 1, 1});
        CHECK(t.data[static_cast<std::size_t>(m)] == doctest::Approx(128.0f).epsilon(1e-5));
    }
    // argmax of the feature equals the symbol value, exhaustively
    for (int m = 0; m < 128; ++m) {
        const nn::TensorF t = featurize(phy::modulate_symbol(m, kP), Modality::fft, kP);
        int best = 0;
        for (int i = 1; i < 128; ++i)
            if (t.data[static_cast<std::size_t>(i)] > t.data[static_cast<std::size_t>(best)])
                best = i;
        CHECK(best == m);
    }
}

TEST_CASE("network builders reproduce the published dimensioning") {
    const auto iq = build_iq_cnn();
    const auto stft = build_stft_cnn();
    const auto fft = build_fft_cnn();
    const auto intdet = build_interference_detector();

    CHECK(iq.input_shape == std::array<int, 3>{128, 1, 2});
    CHECK(stft.input_shape == std::array<int, 3>{64, 65, 2});
    CHECK(fft.input_shape == std::array<int, 3>{128, 1, 1});
    CHECK(intdet.input_shape == std::array<int, 3>{128, 1, 1});
    CHECK(intdet.input_shape == modality_shape(Modality::fft, kP));

    CHECK(count_layers(iq, nn::LayerKind::conv) == 4);
    CHECK(count_layers(stft, nn::LayerKind::conv) == 3);
    CHECK(count_layers(fft, nn::LayerKind::conv) == 4);
    CHECK(count_layers(intdet, nn::LayerKind::conv) == 2);
    for (const auto* spec : {&iq, &stft, &fft, &intdet}) {
        CHECK(count_layers(*spec, nn::LayerKind::batchnorm) ==
              count_layers(*spec, nn::LayerKind::conv));
        CHECK(count_layers(*spec, nn::LayerKind::maxpool) == 1);
        CHECK(count_layers(*spec, nn::LayerKind::dropout) == 1);
    }

    CHECK(iq.initial_lr == 0.015);
    CHECK(stft.initial_lr == 0.001);
    CHECK(fft.initial_lr == 0.0056);

    // conv geometry: 'same' padding keeps spatial sizes through the stack
    const auto fft_shapes = fft.infer_shapes();
    for (std::size_t i = 0; i < fft.layers.size(); ++i)
        if (fft.layers[i].kind == nn::LayerKind::conv)
            CHECK(fft_shapes[i] == std::array<int, 3>{128, 1, 8});
    const auto stft_shapes = stft.infer_shapes();
    for (std::size_t i = 0; i < stft.layers.size(); ++i)
        if (stft.layers[i].kind == nn::LayerKind::conv)
            CHECK(stft_shapes[i] == std::array<int, 3>{64, 65, 9});

    // fully connected parameter counts fall out of the shape arithmetic
    CHECK(dense_params(fft) == 64 * 8 * 128 + 128);  // 65,664
    CHECK(dense_params(intdet) == 64 * 4 * 2 + 2);   // 514
    CHECK(dense_params(iq) == 64 * 8 * 128 + 128);

    // dropout rates per network
    for (const auto& ls : iq.layers)
        if (ls.kind == nn::LayerKind::dropout) CHECK(ls.rate == 0.36);
    for (const auto& ls : stft.layers)
        if (ls.kind == nn::LayerKind::dropout) CHECK(ls.rate == 0.37);
    for (const auto& ls : fft.layers)
        if (ls.kind == nn::LayerKind::dropout) CHECK(ls.rate == 0.24);
    for (const auto& ls : intdet.layers)
        if (ls.kind == nn::LayerKind::dropout) CHECK(ls.rate == 0.30);
}

TEST_CASE("detect_dl enforces the model/modality pairing") {
    Rng rng(3);
    TrainedModel fft_model(nn::Network<float>(build_fft_cnn(), rng), Modality::fft);
    const phy::IqSymbol r = phy::modulate_symbol(5, kP);
    CHECK_THROWS_AS((void)detect_dl(fft_model, r, Modality::iq, kP), std::domain_error);
    const auto res = detect_dl(fft_model, r, Modality::fft, kP);
    CHECK(res.symbol >= 0);
    CHECK(res.symbol < 128);
}

TEST_CASE("an untrained network classifies at chance level") {
    Rng rng(8);
    TrainedModel model(nn::Network<float>(build_fft_cnn(), rng), Modality::fft);
    Rng sym_rng(9);
    int hits = 0;
    const int trials = 512;
    for (int t = 0; t < trials; ++t) {
        const int m = static_cast<int>(sym_rng.uniform_int(128));
        if (detect_dl(model, phy::modulate_symbol(m, kP), Modality::fft, kP).symbol == m)
            ++hits;
    }
    CHECK(static_cast<double>(hits) / trials < 0.05);  // chance is 1/128
}

TEST_CASE("hybnet branches are exactly the two underlying detectors") {
    Rng rng(12);
    TrainedModel fft_model(nn::Network<float>(build_fft_cnn(), rng), Modality::fft);
    TrainedModel intdet(nn::Network<float>(build_interference_detector(), rng),
                        Modality::fft);
    HybnetModel h{&intdet, &fft_model};

    Rng noise(44);
    for (int t = 0; t < 10; ++t) {
        phy::IqSymbol r = phy::modulate_symbol(static_cast<int>(noise.uniform_int(128)), kP);
        for (auto& v : r.samples) v += 2.0 * noise.cgaussian();

        const auto forced_noise = hybnet_branch(h, r, kP, false);
        const auto coh = classic::detect_coherent(r, kP);
        CHECK(forced_noise.symbol == coh.symbol);
        CHECK(forced_noise.score == coh.score);

        const auto forced_intf = hybnet_branch(h, r, kP, true);
        const auto dl = detect_dl(fft_model, r, Modality::fft, kP);
        CHECK(forced_intf.symbol == dl.symbol);
        CHECK(forced_intf.score == dl.score);

        // the dispatched result is always one of the two branch outputs
        const auto dispatched = hybnet_detect(h, r, kP);
        const bool matches_coh =
            dispatched.symbol == coh.symbol && dispatched.score == coh.score;
        const bool matches_dl = dispatched.symbol == dl.symbol && dispatched.score == dl.score;
        CHECK((matches_coh || matches_dl));
    }

    HybnetModel incomplete{nullptr, &fft_model};
    phy::IqSymbol r = phy::modulate_symbol(0, kP);
    CHECK_THROWS_AS((void)hybnet_detect(incomplete, r, kP), std::domain_error);
}

TEST_CASE("interference feature is the phase-invariant magnitude spectrum") {
    Rng rng(27);
    phy::IqSymbol r = phy::modulate_symbol(33, kP);
    for (auto& v : r.samples) v += 0.7 * rng.cgaussian();
    const nn::TensorF f = interference_feature(r, kP);
    REQUIRE(f.shape == std::vector<int>{128, 1, 1});
    const CVec spec = phy::spectrum(phy::dechirp(r, kP));
    for (int i = 0; i < 128; ++i)
        CHECK(f.data[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::abs(spec[static_cast<std::size_t>(i)])).epsilon(1e-6));

    // carrier phase rotations do not change it
    phy::IqSymbol rotated;
    rotated.samples.resize(r.samples.size());
    const cplx rot = std::polar(1.0, 1.234);
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        rotated.samples[i] = rot * r.samples[i];
    const nn::TensorF g = interference_feature(rotated, kP);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        CHECK(g.data[i] == doctest::Approx(f.data[i]).epsilon(1e-6));
}

TEST_CASE("interference-detector checkpoints use their own tag") {
    Rng rng(31);
    nn::Network<float> net(build_interference_detector(), rng);
    const std::string path = "test_intdet.lnn";
    save_interference_detector(path, net);
    TrainedModel back = load_interference_detector(path);
    CHECK(back.net.spec().num_classes() == 2);
    // symbol-model loader refuses it, and vice versa
    CHECK_THROWS_AS((void)load_trained(path), nn::CheckpointError);
    std::remove(path.c_str());

    TrainedModel fft_model(nn::Network<float>(build_fft_cnn(), rng), Modality::fft);
    save_trained("test_fftm.lnn", fft_model);
    CHECK_THROWS_AS((void)load_interference_detector("test_fftm.lnn"), nn::CheckpointError);
    std::remove("test_fftm.lnn");
}

TEST_CASE("trained-model files carry the modality tag") {
    Rng rng(19);
    TrainedModel model(nn::Network<float>(build_stft_cnn(), rng), Modality::stft);
    const std::string path = "test_model_stft.lnn";
    save_trained(path, model);
    TrainedModel back = load_trained(path);
    CHECK(back.modality == Modality::stft);
    CHECK(back.net.spec().layers.size() == model.net.spec().layers.size());
    std::remove(path.c_str());
}

TEST_CASE("each network trains without numerical trouble at its published rate") {
    // tiny dataset, a few epochs: the point is stability (no NaN), not skill
    const int n = 96;
    Rng gen(31);
    for (Modality mod : {Modality::iq, Modality::stft, Modality::fft}) {
        const auto shape = modality_shape(mod, kP);
        nn::TensorF x(std::vector<int>{n, shape[0], shape[1], shape[2]});
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int m = static_cast<int>(gen.uniform_int(128));
            labels[static_cast<std::size_t>(i)] = m;
            phy::IqSymbol r = phy::modulate_symbol(m, kP);
            for (auto& v : r.samples) v += 0.5 * gen.cgaussian();
            const nn::TensorF f = featurize(r, mod, kP);
            std::copy(f.data.begin(), f.data.end(),
                      x.data.begin() + static_cast<std::size_t>(i) * f.numel());
        }
        Rng init(7);
        nn::Network<float> net(spec_for(mod), init);
        nn::TrainingConfig cfg;
        cfg.epochs = 2;
        cfg.minibatch = 32;
        cfg.rng_seed = 11;
        const auto res = train(net, x, labels, cfg);
        CHECK(std::isfinite(res.history.back().mean_loss));
    }
}
