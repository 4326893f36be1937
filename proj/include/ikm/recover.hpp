#pragma once

// Recovery of the projected scattered field from intensity data.
//
// Linearizing |g0 + p|^2 in p gives the real N x 2N system
//     |f|^2 M [Re(g0 + 2p); Im(g0 + 2p)] = d,   M = [diag(Re g0), diag(Im g0)].
// M M^T = diag(|g0|^2) is diagonal, so M^+ = M^T diag(|g0|^2)^-1 is explicit and
// [I, iI] M^+ = diag(conj(g0))^-1. The data determine
//     p~ = p + conj(g0)^-1 * g0 * conj(p) = d / (|f|^2 conj(g0)) - g0
// (products entrywise), which costs about 2N complex operations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "forward.hpp"
#include "scene.hpp"
#include "specfun.hpp"

namespace ikm {

/// The N x 2N measurement matrix, stored implicitly through the g0 it is built from.
class MeasurementMatrix {
public:
    explicit MeasurementMatrix(std::vector<Complex> g0) : g0_(std::move(g0)) {}

    std::size_t rows() const { return g0_.size(); }
    std::size_t cols() const { return 2 * g0_.size(); }

    double operator()(std::size_t r, std::size_t c) const {
        const std::size_t n = rows();
        if (c == r) return g0_[r].real();
        if (c == r + n) return g0_[r].imag();
        return 0.0;
    }

    /// Diagonal of M M^T, i.e. |g0_r|^2.
    std::vector<double> gram_diagonal() const {
        std::vector<double> out(rows());
        for (std::size_t r = 0; r < rows(); ++r) out[r] = std::norm(g0_[r]);
        return out;
    }

    /// Row-major dense copy (test-scale only).
    std::vector<double> materialize() const {
        const std::size_t n = rows();
        std::vector<double> m(n * 2 * n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            m[r * 2 * n + r] = g0_[r].real();
            m[r * 2 * n + r + n] = g0_[r].imag();
        }
        return m;
    }

    const std::vector<Complex>& g0() const { return g0_; }

    /// Ratio of the extreme singular values, max|g0_r| / min|g0_r|.
    double condition() const {
        double lo = std::abs(g0_.front());
        double hi = lo;
        for (const auto& g : g0_) {
            lo = std::min(lo, std::abs(g));
            hi = std::max(hi, std::abs(g));
        }
        return hi / lo;
    }

private:
    std::vector<Complex> g0_;
};

inline MeasurementMatrix build_measurement(const FieldVector& g0) {
    if (g0.size() == 0) throw ValidationError("build_measurement: empty direct-arrival vector");
    for (std::size_t r = 0; r < g0.size(); ++r)
        if (!(std::abs(g0[r]) > 0.0))
            throw NumericError("build_measurement: g0 vanishes at receiver " + std::to_string(r) +
                               " (measurement matrix is rank deficient)");
    return MeasurementMatrix(g0.values);
}

struct RecoveredField {
    FieldVector ptilde;
    double omega = 0.0;
    double conditioning = 1.0;
    double residual_norm = 0.0;    // || |f|^2 Re(conj(g0) (g0 + p~)) - d ||_2
    std::size_t complex_ops = 0;   // operations spent on p~ itself
};

/// p~_r = d_r / (fhat_sq conj(g0_r)) - g0_r. For stochastic data fhat_sq = 2 pi F(omega).
/// Negative entries of d (noisy measurements) are accepted.
inline RecoveredField recover_ptilde(const FieldVector& g0, std::span<const double> d_row, double fhat_sq,
                                     double omega = 0.0) {
    if (d_row.size() != g0.size())
        throw ValidationError("recover_ptilde: data row has " + std::to_string(d_row.size()) + " entries, g0 has " +
                              std::to_string(g0.size()));
    if (!(fhat_sq != 0.0) || !std::isfinite(fhat_sq))
        throw NumericError("recover_ptilde: illumination power |f|^2 is zero (recovery needs |f|^2 != 0)");
    const auto M = build_measurement(g0);

    RecoveredField out;
    out.omega = omega;
    out.ptilde = {std::vector<Complex>(g0.size()), FieldRole::recovered};
    const double inv_f = 1.0 / fhat_sq;
    for (std::size_t r = 0; r < g0.size(); ++r) {
        out.ptilde[r] = (d_row[r] * inv_f) / std::conj(g0[r]) - g0[r];
        out.complex_ops += 2;
    }

    double res2 = 0.0;
    for (std::size_t r = 0; r < g0.size(); ++r) {
        const double model = fhat_sq * (std::conj(g0[r]) * (g0[r] + out.ptilde[r])).real();
        res2 += (model - d_row[r]) * (model - d_row[r]);
    }
    out.residual_norm = std::sqrt(res2);
    out.conditioning = M.condition();
    return out;
}

/// Recovers p~ at every frequency of an intensity data set.
inline std::vector<RecoveredField> recover_all(const Scene& scene, const IntensityData& data) {
    if (data.frequency_count() != scene.band.count)
        throw ValidationError("recover: data has " + std::to_string(data.frequency_count()) +
                              " frequencies, scene band has " + std::to_string(scene.band.count));
    std::vector<RecoveredField> out;
    out.reserve(data.frequency_count());
    for (std::size_t i = 0; i < data.frequency_count(); ++i) {
        const double w = scene.band.omega(i);
        if (std::abs(data.omegas[i] - w) > 1e-12 * w)
            throw ValidationError("recover: data frequency " + std::to_string(i) + " does not match the scene grid");
        if (data.rows[i].size() != scene.receiver_count())
            throw ValidationError("recover: data row " + std::to_string(i) + " has the wrong receiver count");
        out.push_back(recover_ptilde(direct_arrivals(scene, w), data.rows[i], data.illumination[i], w));
    }
    return out;
}

/// Condition number of M at omega:
///   d = 3: max_r |x_r - x_s| / min_r |x_r - x_s| (frequency independent)
///   d = 2: max_r |H0(k |x_r - x_s|)| / min_r |H0(k |x_r - x_s|)|
inline double condition_number(const Scene& scene, double omega) {
    if (!(omega > 0.0)) throw ValidationError("condition_number: omega must be positive");
    double lo = 0.0;
    double hi = 0.0;
    const double k = scene.wavenumber(omega);
    for (std::size_t r = 0; r < scene.receiver_count(); ++r) {
        const double dist = distance(scene.receivers[r], scene.source);
        const double v = scene.dimension == 3 ? dist : std::abs(hankel0_1(k * dist));
        if (r == 0) {
            lo = hi = v;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return hi / lo;
}

/// Result of the geometric imaging-condition check.
struct GeometryReport {
    bool ok = true;
    std::vector<std::size_t> violating_receivers;  // 0-based receiver indices
    double tolerance_rad = 0.0;
};

inline constexpr double kConeTolerance = 1e-6;

namespace detail {

// Signed angle of b relative to a, both in the x-y plane.
inline double planar_angle(const Vec3& a, const Vec3& b) {
    return std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
}

inline bool inside_rectangle(const Vec3& p, const ImageWindowSpec& w) {
    const double half = w.half_extent * w.spacing;
    const double eps = 1e-12 * std::max(norm(w.center), half);
    return std::abs(p.x - w.center.x) <= half + eps && std::abs(p.y - w.center.y) <= half + eps;
}

// Is the direction from xr to xs inside the cone spanned by xr -> window?
inline bool in_cone(const Vec3& xr, const Vec3& xs, const ImageWindowSpec& w, double tol) {
    const auto corners = w.corners();
    const Vec3 s = normalized(xs - xr);
    const double scale = std::max({norm(xr), norm(w.center), 1e-300});
    const double height = xr.z - w.center.z;

    if (std::abs(height) <= 1e-12 * scale) {
        // Receiver in the window plane: the cone is a planar sector.
        if (std::abs(s.z) > std::sin(tol)) return false;
        if (inside_rectangle(xr, w)) return true;
        const Vec3 c = w.center - xr;
        double lo = 0.0;
        double hi = 0.0;
        for (const auto& v : corners) {
            const double a = planar_angle(c, v - xr);
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        const double as = planar_angle(c, s);
        return as >= lo - tol && as <= hi + tol;
    }

    // Off-plane receiver: the cone is a pyramid with edges along the corner directions.
    std::vector<Vec3> d;
    for (const auto& v : corners) d.push_back(normalized(v - xr));
    const Vec3 axis = normalized(w.center - xr);
    for (std::size_t i = 0; i < d.size(); ++i) {
        Vec3 n = cross(d[i], d[(i + 1) % d.size()]);
        const double len = norm(n);
        if (len == 0.0) continue;
        n *= 1.0 / len;
        if (dot(n, axis) < 0.0) n *= -1.0;
        if (dot(n, s) < -std::sin(tol)) return false;
    }
    return dot(s, axis) > 0.0;
}

} // namespace detail

/// Flags every receiver whose cone of directions toward the window contains the
/// direction to the source. ok means the source is outside the union of cones.
inline GeometryReport check_geometric_condition(const Scene& scene, const ImageWindowSpec& window,
                                                double tolerance_rad = kConeTolerance) {
    validate(window);
    GeometryReport rep;
    rep.tolerance_rad = tolerance_rad;
    for (std::size_t r = 0; r < scene.receiver_count(); ++r) {
        if (coincident(scene.receivers[r], scene.source))
            throw ValidationError("check_geometric_condition: source coincides with receiver " + std::to_string(r));
        if (detail::in_cone(scene.receivers[r], scene.source, window, tolerance_rad))
            rep.violating_receivers.push_back(r);
    }
    rep.ok = rep.violating_receivers.empty();
    return rep;
}

inline GeometryReport check_geometric_condition(const Scene& scene) {
    return check_geometric_condition(scene, scene.window);
}

} // namespace ikm
