#pragma once

// The concrete detector networks and their input representations:
//   IQ-CNN   - time domain, Re/Im of the raw symbol as two channels
//   STFT-CNN - time-frequency domain, Re/Im of the raw symbol's spectrogram
//   FFT-CNN  - frequency domain, Re of the dechirped symbol's spectrum
// plus the two-class interference detector and the switching detector that
// routes each symbol to either the coherent detector or the FFT-CNN.

#include "hybnet/classic.hpp"
#include "hybnet/nn/checkpoint.hpp"
#include "hybnet/nn/train.hpp"

namespace hybnet::models {

enum class Modality : std::uint8_t { iq = 0, stft = 1, fft = 2 };

inline const char* to_string(Modality m) {
    switch (m) {
        case Modality::iq: return "iq";
        case Modality::stft: return "stft";
        case Modality::fft: return "fft";
    }
    return "?";
}

inline Modality modality_from_string(const std::string& s) {
    if (s == "iq") return Modality::iq;
    if (s == "stft") return Modality::stft;
    if (s == "fft") return Modality::fft;
    throw std::domain_error("unknown modality: " + s);
}

// Spectrogram geometry: window N/2, overlap N/2 - 1, which gives
// (N/2) x (N/2 + 1) frames; 64 x 65 at N = 128.
inline int stft_window(const phy::LoraParams& p) { return p.samples_per_symbol / 2; }
inline int stft_overlap(const phy::LoraParams& p) { return stft_window(p) - 1; }

inline std::array<int, 3> modality_shape(Modality m, const phy::LoraParams& p) {
    const int n = p.samples_per_symbol;
    switch (m) {
        case Modality::iq: return {n, 1, 2};
        case Modality::stft: {
            const int w = stft_window(p);
            const int frames = (n - stft_overlap(p)) / (w - stft_overlap(p));
            return {w, frames, 2};
        }
        case Modality::fft: return {n, 1, 1};
    }
    throw std::domain_error("modality_shape: bad modality");
}

// Convert one received symbol into the network input for a modality.
inline nn::TensorF featurize(const phy::IqSymbol& r, Modality m, const phy::LoraParams& p) {
    if (r.samples.size() != static_cast<std::size_t>(p.samples_per_symbol))
        throw std::domain_error("featurize: symbol length mismatch");
    const auto shape = modality_shape(m, p);
    nn::TensorF t(std::vector<int>{shape[0], shape[1], shape[2]});
    switch (m) {
        case Modality::iq:
            for (int n = 0; n < p.samples_per_symbol; ++n) {
                t.data[static_cast<std::size_t>(n) * 2 + 0] =
                    static_cast<float>(r.samples[static_cast<std::size_t>(n)].real());
                t.data[static_cast<std::size_t>(n) * 2 + 1] =
                    static_cast<float>(r.samples[static_cast<std::size_t>(n)].imag());
            }
            break;
        case Modality::stft: {
            // spectrogram of the raw (still chirped) symbol
            const phy::Spectrogram sg = phy::stft(r, stft_window(p), stft_overlap(p));
            for (int w = 0; w < sg.window_len; ++w)
                for (int f = 0; f < sg.frames; ++f) {
                    const cplx v = sg.at(w, f);
                    const std::size_t base =
                        (static_cast<std::size_t>(w) * sg.frames + f) * 2;
                    t.data[base + 0] = static_cast<float>(v.real());
                    t.data[base + 1] = static_cast<float>(v.imag());
                }
            break;
        }
        case Modality::fft: {
            const CVec spec = phy::spectrum(phy::dechirp(r, p));
            for (int n = 0; n < p.samples_per_symbol; ++n)
                t.data[static_cast<std::size_t>(n)] =
                    static_cast<float>(spec[static_cast<std::size_t>(n)].real());
            break;
        }
    }
    return t;
}

// Input of the supervisory interference detector: the magnitude spectrum of
// the dechirped symbol, same 128x1x1 geometry as the spectrum modality. The
// magnitude is used rather than the real part because interferer tones carry
// a uniform random phase: a tone with cos(phase) near zero vanishes from the
// real part but never from the envelope, and the supervisor must see it to
// switch branches.
inline nn::TensorF interference_feature(const phy::IqSymbol& r, const phy::LoraParams& p) {
    if (r.samples.size() != static_cast<std::size_t>(p.samples_per_symbol))
        throw std::domain_error("interference_feature: symbol length mismatch");
    const CVec spec = phy::spectrum(phy::dechirp(r, p));
    nn::TensorF t(std::vector<int>{p.samples_per_symbol, 1, 1});
    for (int n = 0; n < p.samples_per_symbol; ++n)
        t.data[static_cast<std::size_t>(n)] =
            static_cast<float>(std::abs(spec[static_cast<std::size_t>(n)]));
    return t;
}

namespace detail {

inline void append_conv_block(nn::NetworkSpec& spec, int filters, int fh, int fw) {
    spec.layers.push_back(nn::LayerSpec::conv(filters, fh, fw));
    spec.layers.push_back(nn::LayerSpec::batchnorm());
    spec.layers.push_back(nn::LayerSpec::relu());
}

inline nn::NetworkSpec symbol_cnn(std::array<int, 3> input, int depth, int filters, int fh,
                                  int fw, double dropout, double lr, int classes) {
    nn::NetworkSpec spec;
    spec.input_shape = input;
    spec.initial_lr = lr;
    for (int i = 0; i < depth; ++i) append_conv_block(spec, filters, fh, fw);
    spec.layers.push_back(nn::LayerSpec::maxpool(2, 1));
    spec.layers.push_back(nn::LayerSpec::dropout(dropout));
    spec.layers.push_back(nn::LayerSpec::dense(classes));
    spec.layers.push_back(nn::LayerSpec::softmax());
    return spec;
}

}  // namespace detail

// Four conv blocks of 8 filters 5x1, pool 2x1, dropout 0.36, FC 128.
inline nn::NetworkSpec build_iq_cnn() {
    return detail::symbol_cnn({128, 1, 2}, 4, 8, 5, 1, 0.36, 0.015, 128);
}

// Three conv blocks of 9 filters 7x7, pool 2x1, dropout 0.37, FC 128.
inline nn::NetworkSpec build_stft_cnn() {
    return detail::symbol_cnn({64, 65, 2}, 3, 9, 7, 7, 0.37, 0.001, 128);
}

// Four conv blocks of 8 filters 19x1, pool 2x1, dropout 0.24, FC 128.
inline nn::NetworkSpec build_fft_cnn() {
    return detail::symbol_cnn({128, 1, 1}, 4, 8, 19, 1, 0.24, 0.0056, 128);
}

// Two conv blocks of 4 filters 19x1, pool 2x1, dropout 0.30, FC 2. Consumes
// the FFT-modality feature; class 0 = noise only, class 1 = interference.
inline nn::NetworkSpec build_interference_detector() {
    return detail::symbol_cnn({128, 1, 1}, 2, 4, 19, 1, 0.30, 0.01, 2);
}

inline nn::NetworkSpec spec_for(Modality m, bool interference_detector = false) {
    if (interference_detector) return build_interference_detector();
    switch (m) {
        case Modality::iq: return build_iq_cnn();
        case Modality::stft: return build_stft_cnn();
        case Modality::fft: return build_fft_cnn();
    }
    throw std::domain_error("spec_for: bad modality");
}

// A trained (or at least constructed) network bound to its input modality.
struct TrainedModel {
    nn::Network<float> net;
    Modality modality;

    TrainedModel(nn::Network<float> n, Modality m) : net(std::move(n)), modality(m) {}
};

// Checkpoint modality tag for the interference detector, whose input is the
// magnitude spectrum rather than one of the three symbol-CNN modalities.
inline constexpr std::uint8_t kInterferenceFeatureTag = 3;

inline void save_trained(const std::string& path, TrainedModel& model) {
    nn::save_model(path, model.net, static_cast<std::uint8_t>(model.modality));
}

inline TrainedModel load_trained(const std::string& path) {
    nn::LoadedModel lm = nn::load_model(path);
    if (lm.modality_tag > static_cast<std::uint8_t>(Modality::fft))
        throw nn::CheckpointError("model: missing modality tag", 8);
    return TrainedModel(std::move(lm.net), static_cast<Modality>(lm.modality_tag));
}

inline void save_interference_detector(const std::string& path, nn::Network<float>& net) {
    nn::save_model(path, net, kInterferenceFeatureTag);
}

// Loads an interference-detector checkpoint. The returned TrainedModel is
// tagged with the spectrum modality for bookkeeping; routing always derives
// its own magnitude feature.
inline TrainedModel load_interference_detector(const std::string& path) {
    nn::LoadedModel lm = nn::load_model(path);
    if (lm.modality_tag != kInterferenceFeatureTag)
        throw nn::CheckpointError("model: not an interference detector", 8);
    return TrainedModel(std::move(lm.net), Modality::fft);
}

// Featurize then classify; the class index is the symbol estimate.
inline classic::DetectionResult detect_dl(TrainedModel& model, const phy::IqSymbol& r,
                                          Modality m, const phy::LoraParams& p) {
    if (model.modality != m)
        throw std::domain_error("detect_dl: model/modality mismatch");
    nn::TensorF x = featurize(r, m, p);
    nn::Prediction pred = model.net.predict(x);
    return {pred.class_index, pred.probabilities[static_cast<std::size_t>(pred.class_index)]};
}

struct HybnetModel {
    TrainedModel* interference_detector = nullptr;
    TrainedModel* fft_cnn = nullptr;
};

// True when the supervisory network classifies the symbol as interference.
inline bool hybnet_route_interference(TrainedModel& intdet, const phy::IqSymbol& r,
                                      const phy::LoraParams& p) {
    nn::TensorF x = interference_feature(r, p);
    return intdet.net.predict(x).class_index == 1;
}

// Branch dispatch given a routing decision (exposed so the two branches can
// be exercised directly).
inline classic::DetectionResult hybnet_branch(HybnetModel& h, const phy::IqSymbol& r,
                                              const phy::LoraParams& p,
                                              bool route_interference) {
    if (route_interference)
        return detect_dl(*h.fft_cnn, r, Modality::fft, p);
    return classic::detect_coherent(r, p);
}

// Hard switch: interference -> FFT-CNN branch, otherwise coherent detection.
inline classic::DetectionResult hybnet_detect(HybnetModel& h, const phy::IqSymbol& r,
                                              const phy::LoraParams& p) {
    if (h.interference_detector == nullptr || h.fft_cnn == nullptr)
        throw std::domain_error("hybnet_detect: sub-models not set");
    const bool route = hybnet_route_interference(*h.interference_detector, r, p);
    return hybnet_branch(h, r, p, route);
}

}  // namespace hybnet::models
