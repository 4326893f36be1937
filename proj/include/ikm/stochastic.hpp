#pragma once

// Stochastic illumination: the source is driven by a stationary Gaussian
// process with power spectrum F(omega), and receivers record power spectra
// (autocorrelations). Frequency samples of the source are drawn directly
// (Wiener-Khinchin); a time-domain autocorrelation oracle validates that
// shortcut at acoustic scale.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "errors.hpp"
#include "forward.hpp"
#include "rng.hpp"
#include "scene.hpp"

namespace ikm {

/// Gaussian power spectrum F(omega) = t_c exp(-(omega - omega0)^2 t_c^2 / (4 pi)).
/// Its inverse transform is F(tau) = exp(-i omega0 tau) exp(-pi tau^2 / t_c^2).
struct PowerSpectrum {
    double omega0 = 0.0;  // rad/s
    double t_c = 0.0;     // correlation time, s

    double operator()(double omega) const {
        const double d = (omega - omega0) * t_c;
        return t_c * std::exp(-d * d / (4.0 * std::numbers::pi));
    }

    /// Distance from omega0 beyond which F < 1e-16 t_c.
    double half_support() const { return std::sqrt(4.0 * std::numbers::pi * 16.0 * std::numbers::ln10) / t_c; }
};

inline void validate(const PowerSpectrum& s) {
    if (!(s.t_c > 0.0) || !std::isfinite(s.t_c)) throw ValidationError("power spectrum: t_c must be positive");
    if (!std::isfinite(s.omega0)) throw ValidationError("power spectrum: omega0 must be finite");
}

/// Spectrum of the optical experiments: 590 THz center, 10 fs correlation time.
/// F < 1e-3 t_c outside 430-750 THz.
inline PowerSpectrum paper_spectrum() { return {2.0 * std::numbers::pi * 590e12, 10e-15}; }

/// Spectrum centered on a band with t_c * (f_max - f_min) = 3.2, so F at the band
/// edges is about 3e-4 t_c (the paper spectrum for the 430-750 THz band).
/// A single-frequency band gets t_c = 10 / f.
inline PowerSpectrum band_spectrum(const FrequencyGrid& band) {
    const double width = band.f_max_hz - band.f_min_hz;
    const double t_c = width > 0.0 ? 3.2 / width : 10.0 / band.center_hz();
    return {2.0 * std::numbers::pi * band.center_hz(), t_c};
}

/// One realization of the source spectrum on a frequency grid.
struct StochasticDraw {
    std::uint64_t seed = 0;
    std::vector<double> omegas;
    std::vector<Complex> fhat;        // f(omega_i)
    std::vector<double> twopi_fhat;   // 2 pi F(omega_i), the expected |f(omega_i)|^2
};

/// Independent circular complex Gaussians with E|f(omega_i)|^2 = twopi_F[i].
inline StochasticDraw sample_illumination(std::span<const double> omegas, std::span<const double> twopi_F,
                                          std::uint64_t seed) {
    if (omegas.empty()) throw ValidationError("sample_illumination: empty frequency grid");
    if (omegas.size() != twopi_F.size()) throw ValidationError("sample_illumination: spectrum/grid size mismatch");
    StochasticDraw d;
    d.seed = seed;
    d.omegas.assign(omegas.begin(), omegas.end());
    d.twopi_fhat.assign(twopi_F.begin(), twopi_F.end());
    d.fhat.resize(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!(twopi_F[i] >= 0.0)) throw ValidationError("sample_illumination: spectrum must be >= 0");
        CounterRng rng(seed, StreamDomain::illumination, {i});
        d.fhat[i] = std::sqrt(twopi_F[i]) * rng.complex_normal();
    }
    return d;
}

inline StochasticDraw sample_illumination(const PowerSpectrum& spectrum, const FrequencyGrid& grid, std::uint64_t seed) {
    validate(spectrum);
    const auto omegas = grid.samples();
    std::vector<double> tf(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) tf[i] = 2.0 * std::numbers::pi * spectrum(omegas[i]);
    return sample_illumination(omegas, tf, seed);
}

namespace detail {

inline void check_draw(const Scene& scene, const StochasticDraw& draw) {
    if (draw.fhat.size() != scene.band.count)
        throw ValidationError("stochastic draw has " + std::to_string(draw.fhat.size()) + " frequencies, band has " +
                              std::to_string(scene.band.count));
    for (std::size_t i = 0; i < draw.omegas.size(); ++i)
        if (draw.omegas[i] != scene.band.omega(i))
            throw ValidationError("stochastic draw was sampled on a different frequency grid");
}

inline std::vector<FieldVector> total_fields(const Scene& scene) {
    std::vector<FieldVector> out(scene.band.count);
    for (std::size_t i = 0; i < scene.band.count; ++i) {
        const double w = scene.band.omega(i);
        out[i] = total_field(direct_arrivals(scene, w), array_response(scene, w));
    }
    return out;
}

} // namespace detail

/// Power-spectrum data |(g0 + p) f(omega_i)|^2; the illumination record is 2 pi F(omega_i).
inline IntensityData clean_power_data(const Scene& scene, const StochasticDraw& draw) {
    detail::check_draw(scene, draw);
    const auto fields = detail::total_fields(scene);
    IntensityData out;
    out.stochastic = true;
    out.omegas = draw.omegas;
    out.illumination = draw.twopi_fhat;
    out.rows.resize(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        out.rows[i].resize(fields[i].size());
        for (std::size_t r = 0; r < fields[i].size(); ++r) out.rows[i][r] = std::norm(fields[i][r] * draw.fhat[i]);
    }
    return out;
}

/// Power-spectrum data with additive receiver noise. Noise samples have the
/// spectral shape of the source and are rescaled per receiver so that
/// sum_i |eta_r(omega_i)|^2 = noise_fraction * sum_i |(g0 + p)_r f(omega_i)|^2.
inline IntensityData noisy_power_data(const Scene& scene, const StochasticDraw& draw, double noise_fraction,
                                      std::uint64_t seed) {
    if (!(noise_fraction >= 0.0) || !std::isfinite(noise_fraction))
        throw ValidationError("noisy_power_data: noise_fraction must be >= 0");
    if (noise_fraction == 0.0) return clean_power_data(scene, draw);
    detail::check_draw(scene, draw);
    const auto fields = detail::total_fields(scene);
    const std::size_t nf = fields.size();
    const std::size_t n = scene.receiver_count();

    std::vector<std::vector<Complex>> signal(nf, std::vector<Complex>(n));
    std::vector<std::vector<Complex>> noise(nf, std::vector<Complex>(n));
    std::vector<double> signal_power(n, 0.0);
    std::vector<double> noise_power(n, 0.0);
    for (std::size_t i = 0; i < nf; ++i) {
        const double amp = std::sqrt(draw.twopi_fhat[i]);
        for (std::size_t r = 0; r < n; ++r) {
            signal[i][r] = fields[i][r] * draw.fhat[i];
            CounterRng rng(seed, StreamDomain::noise, {i, r});
            noise[i][r] = amp * rng.complex_normal();
            signal_power[r] += std::norm(signal[i][r]);
            noise_power[r] += std::norm(noise[i][r]);
        }
    }

    IntensityData out;
    out.stochastic = true;
    out.omegas = draw.omegas;
    out.illumination = draw.twopi_fhat;
    out.rows.assign(nf, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (!(signal_power[r] > 0.0))
            throw NumericError("noisy_power_data: zero signal power at receiver " + std::to_string(r + 1));
        if (!(noise_power[r] > 0.0))
            throw NumericError("noisy_power_data: zero noise power at receiver " + std::to_string(r + 1));
        const double scale = std::sqrt(noise_fraction * signal_power[r] / noise_power[r]);
        for (std::size_t i = 0; i < nf; ++i) out.rows[i][r] = std::norm(signal[i][r] + scale * noise[i][r]);
    }
    return out;
}

/// Output of the time-domain autocorrelation oracle.
struct AutocorrSpectra {
    std::vector<double> omegas;
    std::vector<std::vector<double>> psi_hat;  // [frequency][receiver], real part of the spectrum of psi
    std::vector<std::vector<double>> expected; // F(omega_i) |g0 + p|^2
    std::vector<Complex> psi_zero_lag;         // psi(0) per receiver
    std::vector<double> mean_power;            // (1/2T) sum |u|^2 dt per receiver
    std::size_t record_length = 0;
    std::size_t max_lag = 0;
};

/// Synthesizes receiver traces u(x_r, t) from one realization of the source process,
/// computes the empirical autocorrelation over an acquisition window of length 2T
/// and returns its spectrum at the scene's frequencies.
///
/// The source process is synthesized on a periodic record of M samples (M a power of two,
/// long enough to hold the window plus all lags without wrap-around): mode m at
/// omega_m = 2 pi m / (M dt) gets f_m = sqrt(2 pi F(omega_m) / d_omega) xi_m.
inline AutocorrSpectra time_domain_autocorr_oracle(const Scene& scene, const PowerSpectrum& spectrum, double T,
                                                   double dt, std::uint64_t seed) {
    validate(spectrum);
    if (!(T > 0.0) || !(dt > 0.0)) throw ValidationError("autocorrelation oracle: T and dt must be positive");
    const double omega_hi = std::max(scene.band.omega_max(), spectrum.omega0 + spectrum.half_support());
    if (dt > std::numbers::pi / omega_hi)
        throw NumericError("autocorrelation oracle: dt = " + std::to_string(dt) + " s aliases the band (need dt <= " +
                           std::to_string(std::numbers::pi / omega_hi) + " s)");

    // Lags must cover the source correlation time plus the spread of travel times.
    double spread = 0.0;
    for (const auto& xr : scene.receivers) {
        double lo = distance(xr, scene.source);
        double hi = lo;
        for (const auto& sc : scene.scatterers) {
            const double path = distance(scene.source, sc.position) + distance(sc.position, xr);
            lo = std::min(lo, path);
            hi = std::max(hi, path);
        }
        spread = std::max(spread, (hi - lo) / scene.c0);
    }
    const auto nlag = std::size_t(std::ceil((3.0 * spectrum.t_c + spread) / dt));
    const auto nwin = std::max<std::size_t>(1, std::size_t(std::llround(2.0 * T / dt)));
    std::size_t M = 1;
    while (M < nwin + 2 * nlag + 1) M <<= 1;

    const double d_omega = 2.0 * std::numbers::pi / (double(M) * dt);
    const std::size_t n = scene.receiver_count();

    std::vector<Complex> fhat(M, Complex{});
    for (std::size_t m = 1; m < M; ++m) {
        const double w = double(m) * d_omega;
        if (std::abs(w - spectrum.omega0) > spectrum.half_support()) continue;
        CounterRng rng(seed, StreamDomain::oracle, {m});
        fhat[m] = std::sqrt(2.0 * std::numbers::pi * spectrum(w) / d_omega) * rng.complex_normal();
    }

    std::vector<std::vector<Complex>> traces(n, std::vector<Complex>(M));
    {
        std::vector<Complex> buf(M);
        static std::mutex planner_mutex;
        fftw_plan plan;
        {
            std::lock_guard lock(planner_mutex);
            plan = fftw_plan_dft_1d(int(M), reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        }
        for (std::size_t r = 0; r < n; ++r) {
            std::fill(buf.begin(), buf.end(), Complex{});
            for (std::size_t m = 1; m < M; ++m) {
                if (fhat[m] == Complex{}) continue;
                const double w = double(m) * d_omega;
                Complex g = green0(scene.receivers[r], scene.source, w, scene.c0, scene.dimension);
                const double k = w / scene.c0;
                for (const auto& sc : scene.scatterers)
                    g += k * k * sc.reflectivity * green0(scene.receivers[r], sc.position, w, scene.c0, scene.dimension) *
                         green0(scene.source, sc.position, w, scene.c0, scene.dimension);
                buf[m] = g * fhat[m];
            }
            // u(t_n) = (d_omega / 2 pi) sum_m u_m exp(-i omega_m t_n); FFTW_FORWARD carries exp(-2 pi i m n / M).
            fftw_execute(plan);
            const double norm = d_omega / (2.0 * std::numbers::pi);
            for (std::size_t t = 0; t < M; ++t) traces[r][t] = buf[t] * norm;
        }
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }

    AutocorrSpectra out;
    out.omegas = scene.band.samples();
    out.record_length = M;
    out.max_lag = nlag;
    out.psi_hat.assign(out.omegas.size(), std::vector<double>(n));
    out.expected.assign(out.omegas.size(), std::vector<double>(n));
    out.psi_zero_lag.resize(n);
    out.mean_power.resize(n);

    const std::size_t start = nlag;
    const long L = long(nlag);
    std::vector<Complex> psi(2 * nlag + 1);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& u = traces[r];
        for (long l = -L; l <= L; ++l) {
            Complex acc{};
            for (std::size_t t = 0; t < nwin; ++t)
                acc += std::conj(u[start + t]) * u[std::size_t(long(start + t) + l)];
            psi[std::size_t(l + L)] = acc / double(nwin);
        }
        out.psi_zero_lag[r] = psi[nlag];
        double power = 0.0;
        for (std::size_t t = 0; t < nwin; ++t) power += std::norm(u[start + t]);
        out.mean_power[r] = power / double(nwin);

        for (std::size_t i = 0; i < out.omegas.size(); ++i) {
            const double w = out.omegas[i];
            Complex acc{};
            for (long l = -L; l <= L; ++l) acc += std::polar(1.0, w * double(l) * dt) * psi[std::size_t(l + L)];
            out.psi_hat[i][r] = (acc * dt).real();
        }
    }

    for (std::size_t i = 0; i < out.omegas.size(); ++i) {
        const double w = out.omegas[i];
        const auto g = total_field(direct_arrivals(scene, w), array_response(scene, w));
        for (std::size_t r = 0; r < n; ++r) out.expected[i][r] = spectrum(w) * std::norm(g[r]);
    }
    return out;
}

} // namespace ikm
