#pragma once

// Born-approximation array data: direct arrivals g0, array response p and
// intensity-only measurements |f|^2 |g0 + p|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "scene.hpp"
#include "specfun.hpp"

namespace ikm {

enum class FieldRole { g0, p, total, recovered, other };

/// Complex field sampled at the N receivers of a scene.
struct FieldVector {
    std::vector<Complex> values;
    FieldRole role = FieldRole::other;

    std::size_t size() const { return values.size(); }
    Complex operator[](std::size_t r) const { return values[r]; }
    Complex& operator[](std::size_t r) { return values[r]; }
};

/// Per-frequency intensity (or power-spectrum) rows, plus the illumination power
/// used for each row: |f(omega)|^2 for deterministic data, 2 pi F(omega) for stochastic data.
struct IntensityData {
    std::vector<double> omegas;
    std::vector<std::vector<double>> rows;
    std::vector<double> illumination;
    bool stochastic = false;

    std::size_t frequency_count() const { return rows.size(); }
};

/// g0: entry r is G0(x_r, x_s, omega).
inline FieldVector direct_arrivals(const Scene& scene, double omega) {
    if (!(omega > 0.0)) throw ValidationError("direct_arrivals: omega must be positive");
    FieldVector g0{std::vector<Complex>(scene.receiver_count()), FieldRole::g0};
    for (std::size_t r = 0; r < scene.receiver_count(); ++r)
        g0[r] = green0(scene.receivers[r], scene.source, omega, scene.c0, scene.dimension);
    return g0;
}

/// Direct-arrival vector from an arbitrary point y to the receivers.
inline FieldVector arrivals_from(const Scene& scene, const Vec3& y, double omega) {
    FieldVector g{std::vector<Complex>(scene.receiver_count()), FieldRole::other};
    for (std::size_t r = 0; r < scene.receiver_count(); ++r)
        g[r] = green0(scene.receivers[r], y, omega, scene.c0, scene.dimension);
    return g;
}

/// Born array response, p_r = k^2 sum_j rho_j G0(x_r, z_j) G0(x_s, z_j).
inline FieldVector array_response(const Scene& scene, double omega) {
    if (!(omega > 0.0)) throw ValidationError("array_response: omega must be positive");
    const double k = scene.wavenumber(omega);
    FieldVector p{std::vector<Complex>(scene.receiver_count(), Complex{}), FieldRole::p};
    for (std::size_t j = 0; j < scene.scatterers.size(); ++j) {
        const auto& sc = scene.scatterers[j];
        if (coincident(sc.position, scene.source))
            throw NumericError("array_response: scatterer " + std::to_string(j + 1) + " coincides with the source");
        const Complex weight = k * k * sc.reflectivity *
                               green0(scene.source, sc.position, omega, scene.c0, scene.dimension);
        for (std::size_t r = 0; r < scene.receiver_count(); ++r) {
            if (coincident(sc.position, scene.receivers[r]))
                throw NumericError("array_response: scatterer " + std::to_string(j + 1) + " coincides with receiver " +
                                   std::to_string(r + 1));
            p[r] += weight * green0(scene.receivers[r], sc.position, omega, scene.c0, scene.dimension);
        }
    }
    return p;
}

inline FieldVector total_field(const FieldVector& g0, const FieldVector& p) {
    if (g0.size() != p.size()) throw ValidationError("total_field: length mismatch");
    FieldVector u{std::vector<Complex>(g0.size()), FieldRole::total};
    for (std::size_t r = 0; r < g0.size(); ++r) u[r] = g0[r] + p[r];
    return u;
}

/// Exact quadratic intensity row |f|^2 |g0 + p|^2 (no linearization).
inline std::vector<double> intensity_row(const FieldVector& g0, const FieldVector& p, double fhat_sq) {
    std::vector<double> d(g0.size());
    for (std::size_t r = 0; r < g0.size(); ++r) d[r] = fhat_sq * std::norm(g0[r] + p[r]);
    return d;
}

/// Intensity data over the scene band. `fhat_sq` holds |f(omega_i)|^2 per frequency;
/// an empty span means f == 1.
inline IntensityData intensity_data(const Scene& scene, std::span<const double> fhat_sq = {}) {
    const std::size_t nf = scene.band.count;
    if (!fhat_sq.empty() && fhat_sq.size() != nf)
        throw ValidationError("intensity_data: illumination has " + std::to_string(fhat_sq.size()) +
                              " entries, band has " + std::to_string(nf));
    IntensityData out;
    out.omegas = scene.band.samples();
    out.rows.resize(nf);
    out.illumination.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        const double f2 = fhat_sq.empty() ? 1.0 : fhat_sq[i];
        if (!(f2 >= 0.0)) throw ValidationError("intensity_data: |f|^2 must be >= 0");
        const double w = out.omegas[i];
        out.rows[i] = intensity_row(direct_arrivals(scene, w), array_response(scene, w), f2);
        out.illumination[i] = f2;
    }
    return out;
}

/// max_r |p_r| / |g0_r|: how far the data are from the small-scattering regime.
inline double linearization_residual(const Scene& scene, double omega) {
    const auto g0 = direct_arrivals(scene, omega);
    const auto p = array_response(scene, omega);
    double worst = 0.0;
    for (std::size_t r = 0; r < g0.size(); ++r) worst = std::max(worst, std::abs(p[r]) / std::abs(g0[r]));
    return worst;
}

/// Largest linearization_residual over the scene band.
inline double linearization_residual_band(const Scene& scene) {
    double worst = 0.0;
    for (std::size_t i = 0; i < scene.band.count; ++i)
        worst = std::max(worst, linearization_residual(scene, scene.band.omega(i)));
    return worst;
}

} // namespace ikm
