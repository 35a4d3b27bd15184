#pragma once

// Conventional MFSK detection of dechirped symbols, plus the closed-form
// error rate of noncoherent orthogonal M-FSK used as a reference.

#include <cstdint>

#include "hybnet/phy.hpp"

namespace hybnet::classic {

struct DetectionResult {
    int symbol = 0;
    double score = 0.0;  // winning metric value
};

namespace detail {

// Map an FFT bin index to a symbol value. Bin i sits at frequency i * fs / N;
// dividing by the frequency step and rounding (half away from zero) gives the
// estimate, reduced mod M. With fs == B this is the identity on [0, M).
inline int bin_to_symbol(int bin, const phy::LoraParams& p) {
    const double freq = bin * p.sample_rate_hz / static_cast<double>(p.samples_per_symbol);
    const long m = round_half_away(freq / p.freq_step_hz);
    const long mod = ((m % p.alphabet_size) + p.alphabet_size) % p.alphabet_size;
    return static_cast<int>(mod);
}

template <typename Metric>
DetectionResult detect_argmax(const phy::IqSymbol& r, const phy::LoraParams& p, Metric metric) {
    const CVec spec = phy::spectrum(phy::dechirp(r, p));
    int best_bin = 0;
    double best = metric(spec[0]);
    for (std::size_t i = 1; i < spec.size(); ++i) {
        const double v = metric(spec[i]);
        if (v > best) {  // ties keep the lowest bin
            best = v;
            best_bin = static_cast<int>(i);
        }
    }
    return {bin_to_symbol(best_bin, p), best};
}

}  // namespace detail

// Square-law (envelope) detection: argmax over |FFT(dechirp(r))|.
inline DetectionResult detect_noncoherent(const phy::IqSymbol& r, const phy::LoraParams& p) {
    return detail::detect_argmax(r, p, [](const cplx& v) { return std::abs(v); });
}

// Coherent detection: argmax over Re[FFT(dechirp(r))]. Optimal in AWGN with a
// phase-aligned input; a carrier phase rotation degrades it.
inline DetectionResult detect_coherent(const phy::IqSymbol& r, const phy::LoraParams& p) {
    return detail::detect_argmax(r, p, [](const cplx& v) { return v.real(); });
}

// Bit error rate from symbol error rate for orthogonal M-ary signaling.
inline double ber_from_ser(double ser, int alphabet_size) {
    const double m = static_cast<double>(alphabet_size);
    return ser * (m / 2.0) / (m - 1.0);
}

namespace detail {

// log I0(x) for x >= 0: power series while it is safely summable in double,
// asymptotic expansion beyond.
inline double log_bessel_i0(double x) {
    if (x < 500.0) {
        double term = 1.0, sum = 1.0;
        const double q = 0.25 * x * x;
        for (int k = 1; k < 2000; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return std::log(sum);
    }
    const double ix = 1.0 / x;
    const double corr = 1.0 + 0.125 * ix + (9.0 / 128.0) * ix * ix;
    return x - 0.5 * std::log(kTwoPi * x) + std::log(corr);
}

}  // namespace detail

// Symbol error rate of noncoherent orthogonal M-FSK at symbol SNR Es/N0
// (linear). Equals the alternating binomial sum
//   P_s = sum_{k=1}^{M-1} (-1)^{k+1} C(M-1,k)/(k+1) exp(-k Es / ((k+1) N0)),
// evaluated here through the equivalent envelope integral
//   P_c = int_0^inf r exp(-(r^2+v^2)/2) I0(r v) (1 - exp(-r^2/2))^(M-1) dr,
// v = sqrt(2 Es/N0), which stays numerically stable for large M where the
// binomial terms overwhelm double precision.
inline double noncoherent_mfsk_ser(int alphabet_size, double es_n0_linear) {
    if (alphabet_size < 2) throw std::domain_error("noncoherent_mfsk_ser: M must be >= 2");
    if (es_n0_linear < 0.0) throw std::domain_error("noncoherent_mfsk_ser: Es/N0 must be >= 0");
    const double v = std::sqrt(2.0 * es_n0_linear);
    const double lo = std::max(0.0, v - 14.0);
    const double hi = v + 14.0;
    const int steps = 20000;  // Simpson; even count
    const double h = (hi - lo) / steps;
    const double m1 = static_cast<double>(alphabet_size - 1);

    auto integrand = [&](double r) -> double {
        if (r <= 0.0) return 0.0;
        const double lg = std::log(r) - 0.5 * (r * r + v * v) + detail::log_bessel_i0(r * v);
        const double cdf = -std::expm1(-0.5 * r * r);  // 1 - exp(-r^2/2)
        if (cdf <= 0.0) return 0.0;
        return std::exp(lg + m1 * std::log(cdf));
    };

    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < steps; ++i)
        acc += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    const double p_correct = acc * h / 3.0;
    return std::min(1.0, std::max(0.0, 1.0 - p_correct));
}

// Direct evaluation of the alternating binomial sum. Only usable for small M
// (the terms grow combinatorially and cancel); kept for cross-checking the
// integral form.
inline double noncoherent_mfsk_ser_series(int alphabet_size, double es_n0_linear) {
    if (alphabet_size < 2 || alphabet_size > 32)
        throw std::domain_error("noncoherent_mfsk_ser_series: M must be in [2, 32]");
    const int m1 = alphabet_size - 1;
    double binom = 1.0;  // C(M-1, k)
    double sum = 0.0;
    for (int k = 1; k <= m1; ++k) {
        binom *= static_cast<double>(m1 - k + 1) / static_cast<double>(k);
        const double kk = static_cast<double>(k);
        const double term = binom / (kk + 1.0) * std::exp(-kk * es_n0_linear / (kk + 1.0));
        sum += (k % 2 == 1) ? term : -term;
    }
    return sum;
}

}  // namespace hybnet::classic
