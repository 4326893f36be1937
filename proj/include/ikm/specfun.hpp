#pragma once

// Bessel J0/Y0, the Hankel function H0^(1) and the free-space Helmholtz
// Green's function in two and three dimensions.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>

#include "errors.hpp"
#include "geometry.hpp"

namespace ikm {

using Complex = std::complex<double>;

namespace detail {

// Sum_i c[i] * y^i
template <std::size_t N>
constexpr double horner(const double (&c)[N], double y) {
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * y + c[i];
    return acc;
}

// Rational approximations of the modulus/phase functions P0(8/x), Q0(8/x)
// for x > 8 (Hart, Computer Approximations; same tables as Cephes/Boost).
inline constexpr double kPC[] = {2.2779090197304684302e+04, 4.1345386639580765797e+04,
                                 2.1170523380864944322e+04, 3.4806486443249270347e+03,
                                 1.5376201909008354296e+02, 8.8961548424210455236e-01};
inline constexpr double kQC[] = {2.2779090197304684318e+04, 4.1370412495510416640e+04,
                                 2.1215350561880115730e+04, 3.5028735138235608207e+03,
                                 1.5711159858080893649e+02, 1.0};
inline constexpr double kPS[] = {-8.9226600200800094098e+01, -1.8591953644342993800e+02,
                                 -1.1183429920482737611e+02, -2.2300261666214198472e+01,
                                 -1.2441026745835638459e+00, -8.8033303048680751817e-03};
inline constexpr double kQS[] = {5.7105024128512061905e+03, 1.1951131543434613647e+04,
                                 7.2642780169211018836e+03, 1.4887231232283756582e+03,
                                 9.0593769594993125859e+01, 1.0};

inline constexpr double kSeriesCutoff = 8.0;
inline constexpr double kEulerGamma = 0.57721566490153286061;

struct ModulusPhase {
    double pc;  // P0
    double qs;  // Q0
};

inline ModulusPhase large_argument(double t) {
    const double y = 8.0 / t;
    const double y2 = y * y;
    return {horner(kPC, y2) / horner(kQC, y2), y * horner(kPS, y2) / horner(kQS, y2)};
}

// Power series of J0 and the regular part of Y0, evaluated together.
// J0 = sum (-t^2/4)^m / (m!)^2
// Y0 = (2/pi)(ln(t/2) + gamma) J0 + (2/pi) sum (-1)^(m+1) H_m (t^2/4)^m / (m!)^2
struct SeriesPair {
    double j0;
    double y0_regular;  // the harmonic-number sum, without the 2/pi factor
};

inline SeriesPair small_argument(double t) {
    const double q = 0.25 * t * t;
    double term = 1.0;
    double harmonic = 0.0;
    double j0 = 1.0;
    double reg = 0.0;
    for (int m = 1; m < 60; ++m) {
        term *= -q / (double(m) * double(m));
        harmonic += 1.0 / m;
        j0 += term;
        reg -= harmonic * term;
        if (std::abs(term) * (1.0 + harmonic) < 1e-18 * std::max(1.0, std::abs(j0))) break;
    }
    return {j0, reg};
}

inline void require_finite(double t, const char* fn) {
    if (!std::isfinite(t)) throw NumericError(std::string(fn) + ": non-finite argument");
}

} // namespace detail

/// Bessel function of the first kind, order zero, for t >= 0.
inline double bessel_j0(double t) {
    detail::require_finite(t, "bessel_j0");
    if (t < 0.0) throw NumericError("bessel_j0: negative argument");
    if (t <= detail::kSeriesCutoff) return detail::small_argument(t).j0;
    const auto [pc, qs] = detail::large_argument(t);
    const double chi = t - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * t)) * (pc * std::cos(chi) - qs * std::sin(chi));
}

/// Bessel function of the second kind, order zero, for t > 0.
inline double bessel_y0(double t) {
    detail::require_finite(t, "bessel_y0");
    if (t <= 0.0) throw NumericError("bessel_y0: argument must be positive (Y0 is singular at 0)");
    if (t <= detail::kSeriesCutoff) {
        const auto [j0, reg] = detail::small_argument(t);
        return (2.0 / std::numbers::pi) * ((std::log(0.5 * t) + detail::kEulerGamma) * j0 + reg);
    }
    const auto [pc, qs] = detail::large_argument(t);
    const double chi = t - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * t)) * (pc * std::sin(chi) + qs * std::cos(chi));
}

/// H0^(1)(t) = J0(t) + i Y0(t).
inline Complex hankel0_1(double t) {
    detail::require_finite(t, "hankel0_1");
    if (t <= 0.0) throw NumericError("hankel0_1: argument must be positive");
    if (t <= detail::kSeriesCutoff) {
        const auto [j0, reg] = detail::small_argument(t);
        const double y0 = (2.0 / std::numbers::pi) * ((std::log(0.5 * t) + detail::kEulerGamma) * j0 + reg);
        return {j0, y0};
    }
    const auto [pc, qs] = detail::large_argument(t);
    const double chi = t - 0.25 * std::numbers::pi;
    const double env = std::sqrt(2.0 / (std::numbers::pi * t));
    const double c = std::cos(chi);
    const double s = std::sin(chi);
    return {env * (pc * c - qs * s), env * (pc * s + qs * c)};
}

/// Free-space Green's function of the Helmholtz equation at wavenumber k = omega / c0,
/// given the source-to-observer distance r > 0.
///   d = 2: (i/4) H0^(1)(k r)
///   d = 3: exp(i k r) / (4 pi r)
inline Complex green0_distance(double r, double k, int dimension) {
    if (!(r > 0.0)) throw NumericError("green0: coincident points (Green's function is singular)");
    if (dimension == 3) return std::polar(1.0 / (4.0 * std::numbers::pi * r), k * r);
    if (dimension == 2) return Complex(0.0, 0.25) * hankel0_1(k * r);
    throw ValidationError("green0: dimension must be 2 or 3");
}

inline Complex green0(const Vec3& x, const Vec3& y, double omega, double c0, int dimension) {
    if (!(omega > 0.0)) throw ValidationError("green0: omega must be positive");
    if (coincident(x, y)) throw NumericError("green0: coincident points (Green's function is singular)");
    return green0_distance(distance(x, y), omega / c0, dimension);
}

} // namespace ikm
