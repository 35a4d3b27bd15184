#pragma once

// Received-signal construction: synchronized unit-power target plus a
// time-shifted LoRa interferer plus complex AWGN, with the interferer and
// noise amplitudes set by the interference-to-noise ratio (INR, alpha) and
// the signal-to-interference-plus-noise ratio (SINR, gamma):
//
//   r[n] = x[n] + sqrt(alpha / (gamma (1 + alpha))) * xI[n - tau]
//               + sqrt(1 / (gamma (1 + alpha))) * w[n],   w ~ CN(0, 1)
//
// so that pI / sigma^2 = alpha and ps / (pI + sigma^2) = gamma with ps = 1.

#include <cstdint>

#include "hybnet/phy.hpp"
#include "hybnet/rng.hpp"

namespace hybnet::channel {

struct ChannelConfig {
    double inr_db = 0.0;
    double sinr_db = 0.0;
    int interferer_sf = 7;              // in [7, 12]
    int interferer_offset_samples = 0;  // tau * fs, in [0, 2^interferer_sf * fs/B)
    std::uint64_t rng_seed = 0;         // used by the self-seeded convenience mix
};

struct MixtureCoefficients {
    double interferer_amp = 0.0;
    double noise_amp = 0.0;
};

inline MixtureCoefficients mixture_coefficients(const ChannelConfig& cfg) {
    const double alpha = db_to_linear(cfg.inr_db);
    const double gamma = db_to_linear(cfg.sinr_db);
    const double denom = gamma * (1.0 + alpha);
    return {std::sqrt(alpha / denom), std::sqrt(1.0 / denom)};
}

inline phy::LoraParams interferer_params(const ChannelConfig& cfg,
                                         const phy::LoraParams& target) {
    return phy::LoraParams::make(cfg.interferer_sf, target.bandwidth_hz,
                                 target.sample_rate_hz);
}

// Unit-amplitude interferer waveform cropped to num_out samples. The stream
// is a continuous sequence of chirp symbols delayed so that a symbol boundary
// falls exactly at sample index offset_samples (modulo the interferer symbol
// length); the leading samples are the tail of the preceding symbol.
inline CVec interferer_waveform(const std::vector<int>& symbol_values, int offset_samples,
                                std::size_t num_out, const phy::LoraParams& ip) {
    const int ni = ip.samples_per_symbol;
    if (offset_samples < 0 || offset_samples >= ni)
        throw std::domain_error("interferer_waveform: offset outside one symbol");
    const std::size_t skip =
        static_cast<std::size_t>((ni - offset_samples) % ni);
    const std::size_t needed_syms = (skip + num_out + static_cast<std::size_t>(ni) - 1) /
                                    static_cast<std::size_t>(ni);
    if (symbol_values.size() < needed_syms)
        throw std::domain_error("interferer_waveform: not enough symbol values");

    CVec out(num_out);
    for (std::size_t g = 0; g < num_out; ++g) {
        const std::size_t s = skip + g;
        const std::size_t k = s / static_cast<std::size_t>(ni);
        const int n = static_cast<int>(s % static_cast<std::size_t>(ni));
        const double zeta = symbol_values[k] * ip.freq_step_hz;
        const double ph = phy::detail::chirp_phase(n, zeta, ip);
        out[g] = cplx(std::cos(ph), std::sin(ph));
    }
    return out;
}

// Random-content interferer: i.i.d. uniform symbol values drawn from rng.
inline CVec make_interferer(const ChannelConfig& cfg, const phy::LoraParams& target,
                            std::size_t num_target_samples, Rng& rng) {
    const phy::LoraParams ip = interferer_params(cfg, target);
    const int ni = ip.samples_per_symbol;
    if (cfg.interferer_offset_samples < 0 || cfg.interferer_offset_samples >= ni)
        throw std::domain_error("make_interferer: offset outside one interferer symbol");
    const std::size_t skip =
        static_cast<std::size_t>((ni - cfg.interferer_offset_samples) % ni);
    const std::size_t nsyms = (skip + num_target_samples + static_cast<std::size_t>(ni) - 1) /
                              static_cast<std::size_t>(ni);
    std::vector<int> syms(nsyms);
    for (auto& m : syms)
        m = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(ip.alphabet_size)));
    return interferer_waveform(syms, cfg.interferer_offset_samples, num_target_samples, ip);
}

struct MixParts {
    CVec mixture;     // target + scaled interferer + scaled noise
    CVec interferer;  // already scaled by interferer_amp
    CVec noise;       // already scaled by noise_amp
};

// Draw order is fixed: interferer symbol values first, then noise samples.
inline MixParts mix_parts(const CVec& target, const ChannelConfig& cfg,
                          const phy::LoraParams& target_params, Rng& rng) {
    const MixtureCoefficients c = mixture_coefficients(cfg);
    MixParts parts;
    parts.interferer = make_interferer(cfg, target_params, target.size(), rng);
    for (auto& v : parts.interferer) v *= c.interferer_amp;
    parts.noise.resize(target.size());
    for (auto& v : parts.noise) v = c.noise_amp * rng.cgaussian();
    parts.mixture.resize(target.size());
    for (std::size_t n = 0; n < target.size(); ++n)
        parts.mixture[n] = target[n] + parts.interferer[n] + parts.noise[n];
    return parts;
}

inline CVec mix(const CVec& target, const ChannelConfig& cfg,
                const phy::LoraParams& target_params, Rng& rng) {
    return mix_parts(target, cfg, target_params, rng).mixture;
}

// Convenience wrapper seeded from cfg.rng_seed; same config gives bit-identical output.
inline CVec mix_seeded(const CVec& target, const ChannelConfig& cfg,
                       const phy::LoraParams& target_params) {
    Rng rng(cfg.rng_seed);
    return mix(target, cfg, target_params, rng);
}

}  // namespace hybnet::channel
