#pragma once

// Kirchhoff migration of array data and image-quality metrics.
//
// Single frequency:  Gamma[p, omega](y) = conj(G0(x_s, y)) * g0(y)^* p,
// where g0(y) is the vector of Green's functions from y to the receivers.
// Broadband images sum the single-frequency images over the band with the
// uniform weight d_omega, in ascending frequency order.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "forward.hpp"
#include "parallel.hpp"
#include "recover.hpp"
#include "scene.hpp"
#include "specfun.hpp"

namespace ikm {

/// Complex image over a window. Cells are stored row-major: index = iy * nx + ix,
/// with ix along range and iy along cross-range.
struct ImageGrid {
    ImageWindowSpec window;
    std::vector<Complex> values;
    std::vector<std::uint8_t> flagged;  // cell collides with a receiver or the source
    FrequencyGrid band;
    std::size_t receiver_count = 0;
    double lambda0 = 0.0;

    std::size_t nx() const { return window.cells_per_axis(); }
    std::size_t ny() const { return window.cells_per_axis(); }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx() + ix; }
    Complex at(std::size_t ix, std::size_t iy) const { return values[index(ix, iy)]; }
    bool is_flagged(std::size_t ix, std::size_t iy) const { return flagged[index(ix, iy)] != 0; }

    double magnitude(std::size_t ix, std::size_t iy) const {
        return is_flagged(ix, iy) ? std::numeric_limits<double>::quiet_NaN() : std::abs(at(ix, iy));
    }

    double max_magnitude() const {
        double m = 0.0;
        for (std::size_t c = 0; c < values.size(); ++c)
            if (!flagged[c]) m = std::max(m, std::abs(values[c]));
        return m;
    }
};

inline ImageGrid make_image(const Scene& scene, const ImageWindowSpec& window) {
    validate(window);
    ImageGrid img;
    img.window = window;
    img.values.assign(window.cell_count(), Complex{});
    img.flagged.assign(window.cell_count(), 0);
    img.band = scene.band;
    img.receiver_count = scene.receiver_count();
    img.lambda0 = scene.lambda0();
    for (std::size_t iy = 0; iy < img.ny(); ++iy)
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            const Vec3 y = window.point(ix, iy);
            bool hit = coincident(y, scene.source);
            for (const auto& xr : scene.receivers) hit = hit || coincident(y, xr);
            img.flagged[img.index(ix, iy)] = hit ? 1 : 0;
        }
    return img;
}

/// Single-frequency Kirchhoff image of `field`.
inline ImageGrid migrate_single(const Scene& scene, const FieldVector& field, double omega,
                                const ImageWindowSpec& window, unsigned threads = 1) {
    if (field.size() != scene.receiver_count())
        throw ValidationError("migrate_single: field has " + std::to_string(field.size()) + " entries, scene has " +
                              std::to_string(scene.receiver_count()) + " receivers");
    if (!(omega > 0.0)) throw ValidationError("migrate_single: omega must be positive");
    ImageGrid img = make_image(scene, window);
    parallel_for(img.ny(), threads, [&](std::size_t iy) {
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            const std::size_t c = img.index(ix, iy);
            if (img.flagged[c]) continue;
            const Vec3 y = window.point(ix, iy);
            Complex acc{};
            for (std::size_t r = 0; r < field.size(); ++r)
                acc += std::conj(green0(scene.receivers[r], y, omega, scene.c0, scene.dimension)) * field[r];
            img.values[c] = std::conj(green0(scene.source, y, omega, scene.c0, scene.dimension)) * acc;
        }
    });
    return img;
}

/// Broadband Kirchhoff image: d_omega * sum_i Gamma[fields[i], omega_i], one field per band sample.
inline ImageGrid migrate_broadband(const Scene& scene, const std::vector<FieldVector>& fields,
                                   const ImageWindowSpec& window, unsigned threads = 1) {
    const std::size_t nf = scene.band.count;
    if (fields.size() != nf)
        throw ValidationError("migrate_broadband: got " + std::to_string(fields.size()) + " fields for a band of " +
                              std::to_string(nf) + " frequencies");
    const std::size_t n = scene.receiver_count();
    for (const auto& f : fields)
        if (f.size() != n) throw ValidationError("migrate_broadband: field length does not match receiver count");

    const auto omegas = scene.band.samples();
    const double dw = scene.band.delta_omega();
    ImageGrid img = make_image(scene, window);

    // receiver-major copy so the frequency loop runs over contiguous memory
    std::vector<Complex> data(n * nf);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t r = 0; r < n; ++r) data[r * nf + i] = fields[i][r];

    const double k0 = omegas.front() / scene.c0;
    const double dk = nf > 1 ? (omegas[1] - omegas[0]) / scene.c0 : 0.0;

    parallel_for(img.ny(), threads, [&](std::size_t iy) {
        std::vector<Complex> acc(nf);
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            const std::size_t c = img.index(ix, iy);
            if (img.flagged[c]) continue;
            const Vec3 y = window.point(ix, iy);
            std::fill(acc.begin(), acc.end(), Complex{});
            for (std::size_t r = 0; r < n; ++r) {
                const Complex* row = &data[r * nf];
                if (scene.dimension == 3) {
                    // conj(G0) at equispaced wavenumbers by phasor recurrence
                    const double dist = distance(scene.receivers[r], y);
                    Complex g = std::polar(1.0 / (4.0 * std::numbers::pi * dist), -k0 * dist);
                    const Complex step = std::polar(1.0, -dk * dist);
                    for (std::size_t i = 0; i < nf; ++i) {
                        acc[i] += g * row[i];
                        g *= step;
                    }
                } else {
                    for (std::size_t i = 0; i < nf; ++i)
                        acc[i] += std::conj(green0(scene.receivers[r], y, omegas[i], scene.c0, 2)) * row[i];
                }
            }
            Complex sum{};
            for (std::size_t i = 0; i < nf; ++i)
                sum += std::conj(green0(scene.source, y, omegas[i], scene.c0, scene.dimension)) * acc[i];
            img.values[c] = dw * sum;
        }
    });
    return img;
}

/// True array response at every band frequency.
inline std::vector<FieldVector> array_responses(const Scene& scene) {
    std::vector<FieldVector> out(scene.band.count);
    for (std::size_t i = 0; i < scene.band.count; ++i) out[i] = array_response(scene, scene.band.omega(i));
    return out;
}

inline std::vector<FieldVector> recovered_fields(const std::vector<RecoveredField>& rec) {
    std::vector<FieldVector> out;
    out.reserve(rec.size());
    for (const auto& r : rec) out.push_back(r.ptilde);
    return out;
}

/// s = conj(g0)^-1 * g0 * conj(p): the part of p~ that differs from p.
inline FieldVector spurious_component(const FieldVector& g0, const FieldVector& p) {
    FieldVector s{std::vector<Complex>(g0.size()), FieldRole::other};
    for (std::size_t r = 0; r < g0.size(); ++r) s[r] = g0[r] * std::conj(p[r]) / std::conj(g0[r]);
    return s;
}

struct SpuriousReport {
    double ratio = 0.0;          // max |Gamma[s]| / max |Gamma[p]|
    double max_spurious = 0.0;
    double max_true = 0.0;
    bool degenerate = false;     // Gamma[p] vanishes
    bool geometry_ok = true;
    std::string warning;
};

/// Migrates the spurious component s and the true p over the band and compares peaks.
/// Under the geometric imaging condition the ratio is expected to be small and to
/// shrink as frequency grows.
inline SpuriousReport spurious_term_image(const Scene& scene, unsigned threads = 1) {
    SpuriousReport rep;
    const auto geo = check_geometric_condition(scene);
    rep.geometry_ok = geo.ok;
    if (!geo.ok)
        rep.warning = "geometric imaging condition violated at " + std::to_string(geo.violating_receivers.size()) +
                      " receiver(s)";
    std::vector<FieldVector> ps(scene.band.count);
    std::vector<FieldVector> ss(scene.band.count);
    for (std::size_t i = 0; i < scene.band.count; ++i) {
        const double w = scene.band.omega(i);
        ps[i] = array_response(scene, w);
        ss[i] = spurious_component(direct_arrivals(scene, w), ps[i]);
    }
    rep.max_true = migrate_broadband(scene, ps, scene.window, threads).max_magnitude();
    rep.max_spurious = migrate_broadband(scene, ss, scene.window, threads).max_magnitude();
    if (rep.max_true == 0.0) {
        rep.degenerate = true;
        rep.ratio = 0.0;
    } else {
        rep.ratio = rep.max_spurious / rep.max_true;
    }
    return rep;
}

struct ImageMetrics {
    bool degenerate = false;           // image is identically zero
    std::size_t peak_ix = 0;
    std::size_t peak_iy = 0;
    Vec3 peak_position;
    double peak_value = 0.0;
    double crossrange_fwhm = 0.0;      // meters
    double range_fwhm = 0.0;           // meters
    bool crossrange_clipped = false;   // half maximum not reached before the window edge
    bool range_clipped = false;
    double rayleigh_estimate = 0.0;    // lambda0 L / a
    double range_estimate = 0.0;       // c0 / ((omega_max - omega_min) / 2 pi)
    std::optional<double> correlation; // with a reference image, when one is given
};

namespace detail {

// Width at half maximum along one grid line through the peak, in cells.
template <class Sample>
double half_width_cells(Sample&& value, std::size_t peak, std::size_t count, double half, bool& clipped) {
    auto crossing = [&](int dir) {
        long i = long(peak);
        double prev = value(peak);
        while (true) {
            const long j = i + dir;
            if (j < 0 || j >= long(count)) {
                clipped = true;
                return double(i);
            }
            const double v = value(std::size_t(j));
            if (std::isnan(v)) {
                clipped = true;
                return double(i);
            }
            if (v < half) return double(i) + dir * (prev - half) / (prev - v);
            prev = v;
            i = j;
        }
    };
    return crossing(+1) - crossing(-1);
}

} // namespace detail

/// Normalized inner product of the magnitude layers over cells valid in both images.
inline double image_correlation(const ImageGrid& a, const ImageGrid& b) {
    if (a.values.size() != b.values.size()) throw ValidationError("image_correlation: grid size mismatch");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < a.values.size(); ++c) {
        if (a.flagged[c] || b.flagged[c]) continue;
        const double x = std::abs(a.values[c]);
        const double y = std::abs(b.values[c]);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

inline ImageMetrics image_metrics(const ImageGrid& image, const Scene& scene) {
    ImageMetrics m;
    const double a = aperture(scene);
    const double L = distance(array_centroid(scene), image.window.center);
    m.rayleigh_estimate = a > 0.0 ? image.lambda0 * L / a : std::numeric_limits<double>::infinity();
    const double bw = (scene.band.omega_max() - scene.band.omega_min()) / (2.0 * std::numbers::pi);
    m.range_estimate = bw > 0.0 ? scene.c0 / bw : std::numeric_limits<double>::infinity();

    double best = -1.0;
    for (std::size_t iy = 0; iy < image.ny(); ++iy)
        for (std::size_t ix = 0; ix < image.nx(); ++ix) {
            if (image.is_flagged(ix, iy)) continue;
            const double v = std::abs(image.at(ix, iy));
            if (v > best) {
                best = v;
                m.peak_ix = ix;
                m.peak_iy = iy;
            }
        }
    m.peak_value = std::max(best, 0.0);
    m.peak_position = image.window.point(m.peak_ix, m.peak_iy);
    if (!(best > 0.0)) {
        m.degenerate = true;
        return m;
    }
    const double half = 0.5 * best;
    const double h = image.window.spacing;
    m.range_fwhm = h * detail::half_width_cells([&](std::size_t ix) { return image.magnitude(ix, m.peak_iy); },
                                                m.peak_ix, image.nx(), half, m.range_clipped);
    m.crossrange_fwhm = h * detail::half_width_cells([&](std::size_t iy) { return image.magnitude(m.peak_ix, iy); },
                                                     m.peak_iy, image.ny(), half, m.crossrange_clipped);
    return m;
}

inline ImageMetrics image_metrics(const ImageGrid& image, const Scene& scene, const ImageGrid& reference) {
    ImageMetrics m = image_metrics(image, scene);
    m.correlation = image_correlation(image, reference);
    return m;
}

struct GridCell {
    std::size_t ix = 0;
    std::size_t iy = 0;
    double value = 0.0;
};

/// Strict local maxima of |Gamma| (8-neighbourhood) whose value is at least
/// `fraction` of the global maximum, strongest first.
inline std::vector<GridCell> dominant_maxima(const ImageGrid& image, double fraction) {
    const double floor_value = fraction * image.max_magnitude();
    std::vector<GridCell> out;
    for (std::size_t iy = 0; iy < image.ny(); ++iy)
        for (std::size_t ix = 0; ix < image.nx(); ++ix) {
            if (image.is_flagged(ix, iy)) continue;
            const double v = std::abs(image.at(ix, iy));
            if (v < floor_value || v == 0.0) continue;
            bool peak = true;
            for (int dy = -1; dy <= 1 && peak; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const long jx = long(ix) + dx;
                    const long jy = long(iy) + dy;
                    if (jx < 0 || jy < 0 || jx >= long(image.nx()) || jy >= long(image.ny())) continue;
                    if (image.is_flagged(std::size_t(jx), std::size_t(jy))) continue;
                    if (std::abs(image.at(std::size_t(jx), std::size_t(jy))) >= v) {
                        peak = false;
                        break;
                    }
                }
            if (peak) out.push_back({ix, iy, v});
        }
    std::sort(out.begin(), out.end(), [](const GridCell& a, const GridCell& b) { return a.value > b.value; });
    return out;
}

/// Grid cell nearest to a point (clamped to the window).
inline GridCell nearest_cell(const ImageWindowSpec& w, const Vec3& p) {
    auto idx = [&](double off) {
        const long i = std::lround(off / w.spacing) + w.half_extent;
        return std::size_t(std::clamp<long>(i, 0, 2L * w.half_extent));
    };
    return {idx(p.x - w.center.x), idx(p.y - w.center.y), 0.0};
}

/// Chebyshev distance between two cells, in cells.
inline std::size_t cell_distance(std::size_t ax, std::size_t ay, std::size_t bx, std::size_t by) {
    const auto d = [](std::size_t u, std::size_t v) { return u > v ? u - v : v - u; };
    return std::max(d(ax, bx), d(ay, by));
}

} // namespace ikm
