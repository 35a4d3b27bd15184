#pragma once

// Shared aliases and small numeric helpers used across the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybnet {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

inline double mean_power(const CVec& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

// Round half away from zero, the convention used when mapping FFT bins to
// symbol values at sample rates other than the bandwidth.
inline long round_half_away(double x) {
    return static_cast<long>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

}  // namespace hybnet
