#pragma once

// Experiment geometry: receivers, source, point scatterers, frequency band
// and image window. All lengths are SI meters.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace ikm {

struct PointScatterer {
    Vec3 position;
    double reflectivity = 0.0;

    friend bool operator==(const PointScatterer&, const PointScatterer&) = default;
};

/// Equispaced frequency samples f_min .. f_max (inclusive), stored as angular frequencies.
struct FrequencyGrid {
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    std::size_t count = 0;

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

    double frequency_hz(std::size_t i) const {
        if (count == 1) return f_min_hz;
        return f_min_hz + (f_max_hz - f_min_hz) * (double(i) / double(count - 1));
    }
    double omega(std::size_t i) const { return 2.0 * std::numbers::pi * frequency_hz(i); }

    std::vector<double> samples() const {
        std::vector<double> w(count);
        for (std::size_t i = 0; i < count; ++i) w[i] = omega(i);
        return w;
    }

    /// Quadrature weight of the left-point rule. A single-sample band uses unit weight.
    double delta_omega() const {
        if (count < 2) return 1.0;
        return 2.0 * std::numbers::pi * (f_max_hz - f_min_hz) / double(count - 1);
    }

    double center_hz() const { return 0.5 * (f_min_hz + f_max_hz); }
    double omega_min() const { return omega(0); }
    double omega_max() const { return omega(count - 1); }
};

inline double wavenumber(double omega, double c0) { return omega / c0; }

/// Square grid of image points center + (ix * spacing, iy * spacing, 0), |ix|,|iy| <= half_extent.
/// The first axis is range (normal to the array), the second cross-range.
struct ImageWindowSpec {
    Vec3 center;
    double spacing = 0.0;
    int half_extent = 25;

    friend bool operator==(const ImageWindowSpec&, const ImageWindowSpec&) = default;

    std::size_t cells_per_axis() const { return std::size_t(2 * half_extent + 1); }
    std::size_t cell_count() const { return cells_per_axis() * cells_per_axis(); }

    /// Grid indices run 0 .. 2*half_extent along each axis.
    Vec3 point(std::size_t ix, std::size_t iy) const {
        const double dx = (double(ix) - half_extent) * spacing;
        const double dy = (double(iy) - half_extent) * spacing;
        return {center.x + dx, center.y + dy, center.z};
    }

    std::vector<Vec3> corners() const {
        const auto n = cells_per_axis() - 1;
        return {point(0, 0), point(n, 0), point(n, n), point(0, n)};
    }
};

struct Scene {
    int dimension = 3;       // Green's function branch
    int coord_dim = 2;       // number of coordinates used in documents (2 or 3)
    double c0 = 0.0;         // m/s
    std::vector<Vec3> receivers;
    Vec3 source;
    std::vector<PointScatterer> scatterers;
    FrequencyGrid band;
    ImageWindowSpec window;

    friend bool operator==(const Scene&, const Scene&) = default;

    std::size_t receiver_count() const { return receivers.size(); }
    double wavenumber(double omega) const { return omega / c0; }
    /// Central wavelength c0 / f_center.
    double lambda0() const { return c0 / band.center_hz(); }
};

inline void validate(const FrequencyGrid& band) {
    if (!(std::isfinite(band.f_min_hz) && std::isfinite(band.f_max_hz)))
        throw ValidationError("band: frequencies must be finite");
    if (!(band.f_min_hz > 0.0)) throw ValidationError("band: f_min_hz must be positive");
    if (band.f_max_hz < band.f_min_hz) throw ValidationError("band: f_max_hz must be >= f_min_hz");
    if (band.count < 1) throw ValidationError("band: count must be >= 1");
    if (band.count > 1 && !(band.f_max_hz > band.f_min_hz))
        throw ValidationError("band: samples must be strictly increasing (f_max_hz == f_min_hz with count > 1)");
}

inline void validate(const ImageWindowSpec& w) {
    if (!(w.spacing > 0.0) || !std::isfinite(w.spacing)) throw ValidationError("window: spacing must be positive");
    if (w.half_extent < 0) throw ValidationError("window: half_extent must be >= 0");
}

/// Throws ValidationError describing the first violated invariant.
inline void validate(const Scene& s) {
    if (s.dimension != 2 && s.dimension != 3) throw ValidationError("dimension must be 2 or 3");
    if (s.coord_dim != 2 && s.coord_dim != 3) throw ValidationError("positions must have 2 or 3 coordinates");
    if (!(s.c0 > 0.0) || !std::isfinite(s.c0)) throw ValidationError("c0 must be positive");
    if (s.receivers.empty()) throw ValidationError("at least one receiver is required");
    validate(s.band);
    validate(s.window);
    for (std::size_t r = 0; r < s.receivers.size(); ++r) {
        if (coincident(s.receivers[r], s.source))
            throw ValidationError("source coincides with receiver " + std::to_string(r + 1));
    }
    for (std::size_t a = 0; a < s.receivers.size(); ++a)
        for (std::size_t b = a + 1; b < s.receivers.size(); ++b)
            if (coincident(s.receivers[a], s.receivers[b]))
                throw ValidationError("receivers " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                      " coincide");
    for (std::size_t j = 0; j < s.scatterers.size(); ++j)
        if (!std::isfinite(s.scatterers[j].reflectivity))
            throw ValidationError("scatterer " + std::to_string(j + 1) + ": reflectivity must be finite");
}

/// True when every scatterer lies inside the image window (the CLI warns otherwise).
inline bool scatterers_inside_window(const Scene& s) {
    const double half = s.window.half_extent * s.window.spacing * (1.0 + 1e-12);
    for (const auto& sc : s.scatterers) {
        const Vec3 d = sc.position - s.window.center;
        if (std::abs(d.x) > half || std::abs(d.y) > half) return false;
    }
    return true;
}

/// Evenly spaced receivers on a segment of the given length centered at `center`.
inline std::vector<Vec3> linear_array(const Vec3& center, double length, std::size_t count, const Vec3& axis) {
    if (count == 0) throw ValidationError("receivers.linear: count must be >= 1");
    if (!(length >= 0.0)) throw ValidationError("receivers.linear: length must be >= 0");
    if (!(norm(axis) > 0.0)) throw ValidationError("receivers.linear: axis must be nonzero");
    const Vec3 u = normalized(axis);
    std::vector<Vec3> out(count);
    if (count == 1) {
        out[0] = center;
        return out;
    }
    for (std::size_t r = 0; r < count; ++r) {
        const double s = -0.5 * length + length * (double(r) / double(count - 1));
        out[r] = center + u * s;
    }
    return out;
}

/// Lattice points of pitch `spacing` within `radius` of `center` (in the x-y plane),
/// ordered row-major (outer loop over y, inner over x).
inline std::vector<PointScatterer> disk_scatterer(const Vec3& center, double radius, double spacing, double rho) {
    if (!(radius >= 0.0)) throw ValidationError("disk_scatterer: radius must be >= 0");
    if (!(spacing > 0.0)) throw ValidationError("disk_scatterer: spacing must be positive");
    const int n = int(std::floor(radius / spacing + 1e-9));
    const double r2 = radius * radius * (1.0 + 1e-12);
    std::vector<PointScatterer> out;
    for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
            const double dx = i * spacing;
            const double dy = j * spacing;
            if (dx * dx + dy * dy <= r2) out.push_back({{center.x + dx, center.y + dy, center.z}, rho});
        }
    }
    return out;
}

enum class PaperCase { point, two_points, disk, breakdown_a, breakdown_b, breakdown_c, breakdown_d, stochastic };

inline PaperCase paper_case_from_string(std::string_view name) {
    if (name == "point") return PaperCase::point;
    if (name == "two_points") return PaperCase::two_points;
    if (name == "disk") return PaperCase::disk;
    if (name == "breakdown_a") return PaperCase::breakdown_a;
    if (name == "breakdown_b") return PaperCase::breakdown_b;
    if (name == "breakdown_c") return PaperCase::breakdown_c;
    if (name == "breakdown_d") return PaperCase::breakdown_d;
    if (name == "stochastic") return PaperCase::stochastic;
    throw ValidationError("unknown preset '" + std::string(name) + "'");
}

namespace presets {
inline constexpr double kMillimeter = 1e-3;
inline constexpr double kC0 = 3.0e8;
inline constexpr double kFMin = 430e12;
inline constexpr double kFMax = 750e12;
inline constexpr std::size_t kFreqCount = 100;
inline constexpr std::size_t kReceiverCount = 501;
inline constexpr double kRho = 1e-15;
inline constexpr double kRhoLarge = 1e-10;
/// Disk radius in central wavelengths; the lattice pitch is lambda0 / 4.
inline constexpr double kDiskRadiusLambda = 2.0;
} // namespace presets

/// Scenes of the optical-regime experiments: 501 receivers on a 1 cm line along the
/// cross-range axis, 100 frequencies in 430-750 THz, 3D Green's function on 2D coordinates,
/// image window of 51 x 51 cells with pitch lambda0 / 2.5.
inline Scene paper_scene(PaperCase c) {
    using namespace presets;
    Scene s;
    s.dimension = 3;
    s.coord_dim = 2;
    s.c0 = kC0;
    s.band = {kFMin, kFMax, kFreqCount};
    s.receivers.resize(kReceiverCount);
    for (std::size_t r = 0; r < kReceiverCount; ++r)
        s.receivers[r] = {0.0, (-5.0 + double(r) * (10.0 / 500.0)) * kMillimeter, 0.0};

    const double lambda0 = s.lambda0();
    const Vec3 target{50.0 * kMillimeter, 0.0, 0.0};
    s.source = {5.0 * kMillimeter, -7.5 * kMillimeter, 0.0};
    s.window = {target, lambda0 / 2.5, 25};

    switch (c) {
    case PaperCase::point:
    case PaperCase::stochastic:
        s.scatterers = {{target, kRho}};
        break;
    case PaperCase::two_points:
        s.scatterers = {{{target.x - 3.0 * lambda0, -lambda0, 0.0}, kRho},
                        {{target.x + 6.0 * lambda0, 5.0 * lambda0, 0.0}, kRho}};
        break;
    case PaperCase::disk:
        s.scatterers = disk_scatterer(target, kDiskRadiusLambda * lambda0, lambda0 / 4.0, kRho);
        break;
    case PaperCase::breakdown_a:
        s.scatterers = {{target, kRho}};
        s.source = {target.x - 10.0 * lambda0, 0.0, 0.0};
        break;
    case PaperCase::breakdown_b: {
        const Vec3 near{11.0 * lambda0, 0.0, 0.0};
        s.scatterers = {{near, kRho}};
        s.source = {-50.0 * kMillimeter, 0.0, 0.0};
        s.window.center = near;
        break;
    }
    case PaperCase::breakdown_c:
        s.scatterers = {{target, kRhoLarge}};
        s.source = {5.0 * kMillimeter, -75.0 * kMillimeter, 0.0};
        break;
    case PaperCase::breakdown_d:
        s.scatterers = {{target, kRho}};
        s.source = {5.0 * kMillimeter, 0.0, 0.0};
        break;
    }
    validate(s);
    return s;
}

/// Largest distance between two receivers.
inline double aperture(const Scene& s) {
    double a = 0.0;
    for (std::size_t i = 0; i < s.receivers.size(); ++i)
        for (std::size_t j = i + 1; j < s.receivers.size(); ++j) a = std::max(a, distance(s.receivers[i], s.receivers[j]));
    return a;
}

inline Vec3 array_centroid(const Scene& s) {
    Vec3 c;
    for (const auto& r : s.receivers) c += r;
    return c * (1.0 / double(s.receivers.size()));
}

} // namespace ikm
