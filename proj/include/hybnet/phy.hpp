#pragma once

// LoRa chirp-spread-spectrum signal mathematics: modulation, dechirping,
// spectrum, and spectrogram. Everything here is a pure function of its
// inputs; all signals are complex baseband.

#include <algorithm>
#include <cstddef>

#include "hybnet/common.hpp"
#include "hybnet/fft.hpp"

namespace hybnet::phy {

// Static modulation parameters. A symbol sweeps the full bandwidth B once per
// symbol time Ts = M/B, where M = 2^sf is the alphabet size. The frequency
// shift encoding the value m is zeta = m * freq_step.
struct LoraParams {
    int sf = 7;
    double bandwidth_hz = 125e3;
    double sample_rate_hz = 125e3;
    double symbol_time_s = 0.0;
    int samples_per_symbol = 0;
    int alphabet_size = 0;
    double freq_step_hz = 0.0;
    double chirp_rate_hz_per_s = 0.0;

    static LoraParams make(int sf, double bandwidth_hz, double sample_rate_hz) {
        if (sf < 7 || sf > 12)
            throw std::domain_error("LoraParams: sf must be in [7, 12]");
        if (bandwidth_hz <= 0.0 || sample_rate_hz <= 0.0)
            throw std::domain_error("LoraParams: bandwidth and sample rate must be positive");
        LoraParams p;
        p.sf = sf;
        p.bandwidth_hz = bandwidth_hz;
        p.sample_rate_hz = sample_rate_hz;
        p.alphabet_size = 1 << sf;
        p.symbol_time_s = static_cast<double>(p.alphabet_size) / bandwidth_hz;
        double n = sample_rate_hz * p.symbol_time_s;
        p.samples_per_symbol = static_cast<int>(std::lround(n));
        if (std::abs(n - p.samples_per_symbol) > 1e-9)
            throw std::domain_error("LoraParams: fs * Ts must be an integer sample count");
        p.freq_step_hz = bandwidth_hz / static_cast<double>(p.alphabet_size);
        p.chirp_rate_hz_per_s = bandwidth_hz / p.symbol_time_s;
        return p;
    }

    // SF7, B = 125 kHz, fs = 125 kHz: N = 128 samples, Ts = 1.024 ms.
    static LoraParams sf7_125k() { return make(7, 125e3, 125e3); }
};

// One complex baseband symbol of exactly samples_per_symbol samples.
struct IqSymbol {
    CVec samples;
};

// Complex spectrogram, window_len rows by frames columns (row-major).
struct Spectrogram {
    int window_len = 0;
    int overlap = 0;
    int frames = 0;
    CVec bins;  // bins[w * frames + t]

    cplx at(int w, int t) const {
        return bins[static_cast<std::size_t>(w) * static_cast<std::size_t>(frames) +
                    static_cast<std::size_t>(t)];
    }
};

namespace detail {

// Accumulated phase (radians) of a chirp with frequency shift zeta at sample
// n, i.e. the discrete integral of the instantaneous frequency
//   f_i = ((beta * i / fs + zeta) mod B) - B/2,  i = 0 .. n-1.
// The modulo-B fold subtracts B from every term past the single wrap index,
// which turns the sum into closed form while keeping the phase continuous.
inline double chirp_phase(int n, double zeta, const LoraParams& p) {
    const double fs = p.sample_rate_hz;
    const double b = p.bandwidth_hz;
    const double beta = p.chirp_rate_hz_per_s;
    // First sample index with beta * i / fs + zeta >= B.
    const double wrap = std::ceil((b - zeta) * fs / beta - 1e-9);
    const double nd = static_cast<double>(n);
    double acc = nd * (zeta - 0.5 * b) + beta * nd * (nd - 1.0) / (2.0 * fs);
    if (nd > wrap) acc -= b * (nd - wrap);
    return kTwoPi * acc / fs;
}

}  // namespace detail

// Evaluate one modulated symbol at t = n / fs, n = 0 .. N-1. Every sample is
// unit modulus and the phase is continuous across the frequency fold.
inline IqSymbol modulate_symbol(int symbol_value, const LoraParams& p) {
    if (symbol_value < 0 || symbol_value >= p.alphabet_size)
        throw std::domain_error("modulate_symbol: symbol value out of range");
    const double zeta = symbol_value * p.freq_step_hz;
    IqSymbol s;
    s.samples.resize(static_cast<std::size_t>(p.samples_per_symbol));
    for (int n = 0; n < p.samples_per_symbol; ++n) {
        double ph = detail::chirp_phase(n, zeta, p);
        s.samples[static_cast<std::size_t>(n)] = cplx(std::cos(ph), std::sin(ph));
    }
    return s;
}

// Concatenation of K symbols; symbol k occupies samples [k*N, (k+1)*N).
inline CVec modulate_message(const std::vector<int>& symbol_values, const LoraParams& p) {
    if (symbol_values.empty())
        throw std::domain_error("modulate_message: empty symbol sequence");
    CVec out;
    out.reserve(symbol_values.size() * static_cast<std::size_t>(p.samples_per_symbol));
    for (int m : symbol_values) {
        IqSymbol s = modulate_symbol(m, p);
        out.insert(out.end(), s.samples.begin(), s.samples.end());
    }
    return out;
}

// Inverted chirp used for dechirping: the complex conjugate of the zero-shift
// symbol, so that the product with any modulated symbol is a single tone.
inline IqSymbol downchirp(const LoraParams& p) {
    IqSymbol d = modulate_symbol(0, p);
    for (auto& v : d.samples) v = std::conj(v);
    return d;
}

// Elementwise product with the inverted chirp. A clean symbol with value m
// becomes the tone exp(j 2 pi zeta_m n / fs).
inline IqSymbol dechirp(const IqSymbol& r, const LoraParams& p) {
    if (r.samples.size() != static_cast<std::size_t>(p.samples_per_symbol))
        throw std::domain_error("dechirp: symbol length does not match params");
    IqSymbol d = downchirp(p);
    IqSymbol z;
    z.samples.resize(r.samples.size());
    for (std::size_t n = 0; n < r.samples.size(); ++n)
        z.samples[n] = r.samples[n] * d.samples[n];
    return z;
}

// N-point unnormalized forward DFT; bin i corresponds to frequency i * fs / N.
inline CVec spectrum(const IqSymbol& z) { return dft(z.samples); }

// Sliding-window transform with a symmetric Hamming window. Frame p covers
// samples [p*(W-L), p*(W-L)+W); requires (N - L) divisible by (W - L).
inline Spectrogram stft(const IqSymbol& r, int window_len, int overlap) {
    const int n = static_cast<int>(r.samples.size());
    if (window_len <= overlap)
        throw std::domain_error("stft: window_len must exceed overlap");
    if (window_len > n) throw std::domain_error("stft: window longer than signal");
    const int hop = window_len - overlap;
    if ((n - overlap) % hop != 0)
        throw std::domain_error("stft: (N - overlap) not divisible by (window_len - overlap)");
    const int frames = (n - overlap) / hop;

    const std::vector<double> win = hamming_window(window_len);
    Spectrogram sg;
    sg.window_len = window_len;
    sg.overlap = overlap;
    sg.frames = frames;
    sg.bins.resize(static_cast<std::size_t>(window_len) * static_cast<std::size_t>(frames));

    CVec frame(static_cast<std::size_t>(window_len));
    for (int p = 0; p < frames; ++p) {
        const int start = p * hop;
        for (int i = 0; i < window_len; ++i)
            frame[static_cast<std::size_t>(i)] =
                r.samples[static_cast<std::size_t>(start + i)] * win[static_cast<std::size_t>(i)];
        CVec spec = dft(frame);
        for (int w = 0; w < window_len; ++w)
            sg.bins[static_cast<std::size_t>(w) * static_cast<std::size_t>(frames) +
                    static_cast<std::size_t>(p)] = spec[static_cast<std::size_t>(w)];
    }
    return sg;
}

}  // namespace hybnet::phy
