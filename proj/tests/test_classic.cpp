#include "doctest.h"
#include "hybnet/classic.hpp"
#include "hybnet/rng.hpp"

using namespace hybnet;
using namespace hybnet::classic;

namespace {
const phy::LoraParams kP = phy::LoraParams::sf7_125k();

phy::IqSymbol noisy_symbol(int m, double sigma, Rng& rng) {
    phy::IqSymbol s = phy::modulate_symbol(m, kP);
    for (auto& v : s.samples) v += sigma * rng.cgaussian();
    return s;
}
}  // namespace

TEST_CASE("noiseless input: both detectors recover every symbol value") {
    for (int m = 0; m < kP.alphabet_size; ++m) {
        const phy::IqSymbol s = phy::modulate_symbol(m, kP);
        CHECK(detect_noncoherent(s, kP).symbol == m);
        CHECK(detect_coherent(s, kP).symbol == m);
    }
}

TEST_CASE("20 dB Es/N0 leaves no symbol errors in 10^4 trials") {
    // sigma^2 = N / (Es/N0)
    const double sigma = std::sqrt(128.0 / db_to_linear(20.0));
    Rng rng(7);
    int errors = 0;
    for (int t = 0; t < 10000; ++t) {
        const int m = static_cast<int>(rng.uniform_int(128));
        if (detect_noncoherent(noisy_symbol(m, sigma, rng), kP).symbol != m) ++errors;
    }
    CHECK(errors == 0);
}

TEST_CASE("noncoherent SER matches the closed-form MFSK reference (spot check)") {
    // Es/N0 chosen where the SER is large enough to estimate with 2e4 trials
    for (const double es_n0_db : {8.0, 10.0}) {
        const double p_ref = noncoherent_mfsk_ser(128, db_to_linear(es_n0_db));
        const double sigma = std::sqrt(128.0 / db_to_linear(es_n0_db));
        const long trials = 20000;
        Rng rng(900 + static_cast<std::uint64_t>(es_n0_db));
        long errors = 0;
        for (long t = 0; t < trials; ++t) {
            const int m = static_cast<int>(rng.uniform_int(128));
            if (detect_noncoherent(noisy_symbol(m, sigma, rng), kP).symbol != m) ++errors;
        }
        const double ser = static_cast<double>(errors) / trials;
        const double sd = std::sqrt(p_ref * (1.0 - p_ref) / trials);
        CHECK(std::abs(ser - p_ref) < 3.0 * sd);
    }
}

TEST_CASE("closed form: integral equals the alternating series where both are usable") {
    for (int m : {2, 4, 8, 16}) {
        for (const double x : {0.5, 2.0, 6.0, 12.0}) {
            const double a = noncoherent_mfsk_ser(m, x);
            const double b = noncoherent_mfsk_ser_series(m, x);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
    // binary case has the textbook form 0.5 exp(-x/2)
    for (const double x : {1.0, 4.0, 9.0})
        CHECK(noncoherent_mfsk_ser(2, x) ==
              doctest::Approx(0.5 * std::exp(-x / 2.0)).epsilon(1e-9));
    CHECK_THROWS_AS((void)noncoherent_mfsk_ser(1, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)noncoherent_mfsk_ser_series(128, 1.0), std::domain_error);
}

TEST_CASE("coherent does not lose to noncoherent on paired AWGN") {
    const double sigma = std::sqrt(128.0 / db_to_linear(9.0));  // SER ~ 0.2
    Rng rng(41);
    long coh = 0, ncoh = 0;
    for (int t = 0; t < 20000; ++t) {
        const int m = static_cast<int>(rng.uniform_int(128));
        const phy::IqSymbol s = noisy_symbol(m, sigma, rng);
        if (detect_coherent(s, kP).symbol != m) ++coh;
        if (detect_noncoherent(s, kP).symbol != m) ++ncoh;
    }
    CHECK(coh <= ncoh);
}

TEST_CASE("both detectors are scale-invariant") {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        const int m = static_cast<int>(rng.uniform_int(128));
        const phy::IqSymbol s = noisy_symbol(m, 3.0, rng);
        const int nc = detect_noncoherent(s, kP).symbol;
        const int co = detect_coherent(s, kP).symbol;
        for (const double c : {1e-3, 7.0, 1e3}) {
            phy::IqSymbol scaled;
            scaled.samples.resize(s.samples.size());
            for (std::size_t i = 0; i < s.samples.size(); ++i)
                scaled.samples[i] = c * s.samples[i];
            CHECK(detect_noncoherent(scaled, kP).symbol == nc);
            CHECK(detect_coherent(scaled, kP).symbol == co);
        }
    }
}

TEST_CASE("noncoherent detection is phase-invariant, coherent is not") {
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        const int m = static_cast<int>(rng.uniform_int(128));
        const phy::IqSymbol s = noisy_symbol(m, 2.0, rng);
        const int nc = detect_noncoherent(s, kP).symbol;
        for (const double phi : {0.3, 1.2, 2.8, 4.5}) {
            const cplx rot = std::polar(1.0, phi);
            phy::IqSymbol rotated;
            rotated.samples.resize(s.samples.size());
            for (std::size_t i = 0; i < s.samples.size(); ++i)
                rotated.samples[i] = rot * s.samples[i];
            CHECK(detect_noncoherent(rotated, kP).symbol == nc);
        }
    }

    // a pi/2 rotation moves the matched bin's energy off the real axis
    for (int m = 0; m < 128; ++m) {
        phy::IqSymbol s = phy::modulate_symbol(m, kP);
        for (auto& v : s.samples) v *= cplx(0.0, 1.0);
        const CVec spec = phy::spectrum(phy::dechirp(s, kP));
        CHECK(std::abs(spec[static_cast<std::size_t>(m)].real()) < 1e-6);
    }
    // with mild noise present, the rotated bin loses to noise on the real
    // axis and coherent detection collapses to chance while the envelope
    // detector is unaffected
    Rng nrng(29);
    int coh_intact = 0, ncoh_intact = 0;
    for (int m = 0; m < 128; ++m) {
        phy::IqSymbol s = noisy_symbol(m, 0.5, nrng);
        for (auto& v : s.samples) v *= cplx(0.0, 1.0);
        if (detect_coherent(s, kP).symbol == m) ++coh_intact;
        if (detect_noncoherent(s, kP).symbol == m) ++ncoh_intact;
    }
    CHECK(coh_intact < 16);  // destroyed, not merely degraded
    CHECK(ncoh_intact == 128);
}

TEST_CASE("BER/SER conversion factor for orthogonal signaling") {
    CHECK(ber_from_ser(0.254, 128) == doctest::Approx(0.254 * 64.0 / 127.0).epsilon(1e-15));
    CHECK(ber_from_ser(1.0, 2) == doctest::Approx(1.0).epsilon(1e-15));
}
