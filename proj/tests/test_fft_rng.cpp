#include "doctest.h"
#include "hybnet/fft.hpp"
#include "hybnet/rng.hpp"
#include "testutil.hpp"

using namespace hybnet;

TEST_CASE("fft matches a direct-DFT oracle on random inputs") {
    Rng rng(101);
    for (std::size_t n : {2u, 8u, 64u, 128u, 256u}) {
        CVec x(n);
        for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
        const CVec got = fft(x);
        const CVec want = testutil::dft_oracle(x);
        double scale = 0.0;
        for (const auto& v : want) scale = std::max(scale, std::abs(v));
        CHECK(testutil::max_abs_diff(got, want) < 1e-9 * std::max(1.0, scale));
    }
}

TEST_CASE("non-power-of-two sizes go through the direct transform") {
    Rng rng(102);
    CVec x(12);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    CHECK(testutil::max_abs_diff(dft(x), testutil::dft_oracle(x)) < 1e-9);
    CHECK_THROWS_AS((void)fft(x), std::invalid_argument);
}

TEST_CASE("DFT linearity holds to 1e-9 on random inputs") {
    Rng rng(103);
    CVec x(128), y(128);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    for (auto& v : y) v = {rng.gaussian(), rng.gaussian()};
    const cplx a(1.7, -0.3), b(-0.4, 2.2);
    CVec combo(128);
    for (std::size_t i = 0; i < 128; ++i) combo[i] = a * x[i] + b * y[i];
    const CVec lhs = fft(combo);
    const CVec fx = fft(x), fy = fft(y);
    CVec rhs(128);
    for (std::size_t i = 0; i < 128; ++i) rhs[i] = a * fx[i] + b * fy[i];
    CHECK(testutil::max_abs_diff(lhs, rhs) < 1e-9 * 128);
}

TEST_CASE("Parseval: sum |x|^2 == (1/N) sum |X|^2") {
    Rng rng(104);
    CVec x(128);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    const CVec spec = fft(x);
    double t = 0.0, f = 0.0;
    for (const auto& v : x) t += std::norm(v);
    for (const auto& v : spec) f += std::norm(v);
    CHECK(testutil::rel_err(t, f / 128.0) < 1e-9);
}

TEST_CASE("inverse transform round-trips") {
    Rng rng(105);
    CVec x(64);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    CHECK(testutil::max_abs_diff(ifft(fft(x)), x) < 1e-12 * 64);
}

TEST_CASE("Hamming window is the symmetric 0.54/0.46 form") {
    const auto w = hamming_window(64);
    CHECK(w.size() == 64);
    CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(w[63] == doctest::Approx(0.08).epsilon(1e-12));
    for (int i = 0; i < 32; ++i) CHECK(w[i] == doctest::Approx(w[63 - i]).epsilon(1e-12));
    CHECK(w[20] == doctest::Approx(0.54 - 0.46 * std::cos(kTwoPi * 20 / 63.0)).epsilon(1e-12));
}

TEST_CASE("rng: determinism, ranges, and split independence") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.uniform_int(17) < 17);
    }

    Rng parent(9);
    Rng c0 = parent.split(0), c1 = parent.split(1), c0b = parent.split(0);
    CHECK(c0.next_u64() != c1.next_u64());
    Rng c0c = parent.split(0);
    CHECK(c0b.next_u64() == c0c.next_u64());
}

TEST_CASE("rng: gaussian and complex-gaussian moments") {
    Rng r(11);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian();
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));

    double re_sq = 0.0, im_sq = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx z = r.cgaussian();
        re_sq += z.real() * z.real();
        im_sq += z.imag() * z.imag();
        cross += z.real() * z.imag();
    }
    CHECK(re_sq / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(im_sq / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(cross / n) < 0.01);
}
