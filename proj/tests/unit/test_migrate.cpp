#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ikm/forward.hpp"
#include "ikm/migrate.hpp"
#include "ikm/pipeline.hpp"
#include "ikm/recover.hpp"

using namespace ikm;

namespace {

Scene small_scene(int dimension = 3) {
    Scene s;
    s.dimension = dimension;
    s.c0 = 1.0;
    for (int r = 0; r < 9; ++r) s.receivers.push_back({0.0, double(r) - 4.0, 0.0});
    s.source = {0.5, -7.0, 0.0};
    s.scatterers = {{{30.0, 0.3, 0.0}, 1e-3}};
    s.band = {1.0, 2.0, 5};
    s.window = {{30.0, 0.0, 0.0}, 0.25, 4};
    validate(s);
    return s;
}

FieldVector random_field(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> g;
    FieldVector f{std::vector<Complex>(n), FieldRole::other};
    for (std::size_t r = 0; r < n; ++r) f[r] = {g(gen), g(gen)};
    return f;
}

} // namespace

TEST(Migrate, ZeroFieldGivesZeroImage) {
    const Scene s = small_scene();
    const FieldVector zero{std::vector<Complex>(s.receiver_count()), FieldRole::p};
    const auto img = migrate_single(s, zero, 1.5, s.window);
    for (const auto& v : img.values) EXPECT_EQ(v, Complex{});
    const auto m = image_metrics(img, s);
    EXPECT_TRUE(m.degenerate);
    const std::vector<FieldVector> zeros(s.band.count, zero);
    for (const auto& v : migrate_broadband(s, zeros, s.window).values) EXPECT_EQ(v, Complex{});
}

TEST(Migrate, SingleReceiverProduct) {
    Scene s = small_scene();
    s.receivers = {{0.0, 0.0, 0.0}};
    const Complex f1(0.3, -1.2);
    const auto img = migrate_single(s, {{f1}, FieldRole::p}, 1.7, s.window);
    for (std::size_t iy = 0; iy < img.ny(); ++iy)
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            const Vec3 y = s.window.point(ix, iy);
            const Complex want = std::conj(green0(s.source, y, 1.7, 1.0, 3)) *
                                 std::conj(green0(s.receivers[0], y, 1.7, 1.0, 3)) * f1;
            EXPECT_NEAR(std::abs(img.at(ix, iy) - want), 0.0, 1e-15 * std::abs(want));
        }
}

TEST(Migrate, MatchedFilterBound) {
    std::mt19937_64 gen(3);
    for (int dim : {2, 3}) {
        const Scene s = small_scene(dim);
        const double w = 1.3;
        const std::size_t cx = 5, cy = 2;
        const Vec3 y0 = s.window.point(cx, cy);
        const auto g = arrivals_from(s, y0, w);
        const auto img = migrate_single(s, g, w, s.window);
        double gnorm2 = 0;
        for (std::size_t r = 0; r < g.size(); ++r) gnorm2 += std::norm(g[r]);
        const double want = std::abs(green0(s.source, y0, w, 1.0, dim)) * gnorm2;
        EXPECT_NEAR(std::abs(img.at(cx, cy)), want, 1e-12 * want);
        for (int k = 0; k < 200; ++k) {
            auto f = random_field(gen, g.size());
            double fn = 0;
            for (std::size_t r = 0; r < f.size(); ++r) fn += std::norm(f[r]);
            for (std::size_t r = 0; r < f.size(); ++r) f[r] *= std::sqrt(gnorm2 / fn);
            EXPECT_LE(std::abs(migrate_single(s, f, w, s.window).at(cx, cy)), want * (1 + 1e-12));
        }
    }
}

TEST(Migrate, Linearity) {
    std::mt19937_64 gen(4);
    const Scene s = small_scene(2);
    const auto p = random_field(gen, s.receiver_count());
    const auto q = random_field(gen, s.receiver_count());
    const Complex a(0.7, -0.2), b(-1.5, 0.4);
    FieldVector c{std::vector<Complex>(p.size()), FieldRole::other};
    for (std::size_t r = 0; r < p.size(); ++r) c[r] = a * p[r] + b * q[r];
    const auto ip = migrate_single(s, p, 1.1, s.window);
    const auto iq = migrate_single(s, q, 1.1, s.window);
    const auto ic = migrate_single(s, c, 1.1, s.window);
    for (std::size_t k = 0; k < ic.values.size(); ++k) {
        const Complex want = a * ip.values[k] + b * iq.values[k];
        EXPECT_NEAR(std::abs(ic.values[k] - want), 0.0, 1e-13 * (std::abs(ip.values[k]) + std::abs(iq.values[k])));
    }
}

TEST(Migrate, SingleFrequencyBandEqualsScaledSingle) {
    Scene s = small_scene();
    s.band = {1.2, 1.2, 1};
    const auto p = array_response(s, s.band.omega(0));
    const auto single = migrate_single(s, p, s.band.omega(0), s.window);
    const auto broad = migrate_broadband(s, {p}, s.window);
    for (std::size_t k = 0; k < single.values.size(); ++k)
        EXPECT_NEAR(std::abs(broad.values[k] - s.band.delta_omega() * single.values[k]), 0.0,
                    1e-12 * std::abs(single.values[k]));
}

TEST(Migrate, BroadbandIsWeightedSumOfSingles) {
    for (int dim : {2, 3}) {
        const Scene s = small_scene(dim);
        const auto fields = array_responses(s);
        const auto broad = migrate_broadband(s, fields, s.window);
        std::vector<Complex> sum(broad.values.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto im = migrate_single(s, fields[i], s.band.omega(i), s.window);
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += s.band.delta_omega() * im.values[k];
        }
        double scale = 0;
        for (const auto& v : sum) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < sum.size(); ++k) EXPECT_NEAR(std::abs(broad.values[k] - sum[k]), 0.0, 1e-11 * scale);
    }
}

TEST(Migrate, FrequencyCountMismatch) {
    const Scene s = small_scene();
    auto fields = array_responses(s);
    fields.pop_back();
    EXPECT_THROW(migrate_broadband(s, fields, s.window), ValidationError);
    EXPECT_THROW(migrate_single(s, fields[0], 0.0, s.window), ValidationError);
    fields[0].values.pop_back();
    EXPECT_THROW(migrate_single(s, fields[0], 1.0, s.window), ValidationError);
}

TEST(Migrate, ThreadCountDoesNotChangeImage) {
    const Scene s = paper_scene(PaperCase::two_points);
    Scene small = s;
    small.window.half_extent = 6;
    const auto fields = array_responses(small);
    const auto a = migrate_broadband(small, fields, small.window, 1);
    const auto b = migrate_broadband(small, fields, small.window, 3);
    EXPECT_EQ(a.values, b.values);
}

TEST(Migrate, CollidingCellsFlagged) {
    Scene s = small_scene();
    s.window = {{0.0, 0.0, 0.0}, 1.0, 2};  // covers receivers at y = -2 .. 2
    const auto img = migrate_single(s, array_response(s, 1.0), 1.0, s.window);
    std::size_t flagged = 0;
    for (auto f : img.flagged) flagged += f;
    EXPECT_EQ(flagged, 5u);
    EXPECT_TRUE(img.is_flagged(2, 2));
    EXPECT_TRUE(std::isnan(img.magnitude(2, 2)));
    const auto m = image_metrics(img, s);
    EXPECT_FALSE(img.is_flagged(m.peak_ix, m.peak_iy));
}

TEST(Migrate, DecompositionIdentity) {
    // Gamma[p~] = Gamma[p] + Gamma[s] for recoveries from linearized data
    const Scene s = small_scene();
    std::vector<FieldVector> pt, ps, ss;
    for (std::size_t i = 0; i < s.band.count; ++i) {
        const double w = s.band.omega(i);
        const auto g0 = direct_arrivals(s, w);
        const auto p = array_response(s, w);
        std::vector<double> d(g0.size());
        for (std::size_t r = 0; r < d.size(); ++r) d[r] = std::norm(g0[r]) + 2.0 * (std::conj(g0[r]) * p[r]).real();
        pt.push_back(recover_ptilde(g0, d, 1.0, w).ptilde);
        ps.push_back(p);
        ss.push_back(spurious_component(g0, p));
    }
    const auto a = migrate_broadband(s, pt, s.window);
    const auto b = migrate_broadband(s, ps, s.window);
    const auto c = migrate_broadband(s, ss, s.window);
    const double scale = b.max_magnitude();
    for (std::size_t k = 0; k < a.values.size(); ++k)
        EXPECT_NEAR(std::abs(a.values[k] - b.values[k] - c.values[k]), 0.0, 1e-9 * scale);
}

TEST(Metrics, SingleCellImage) {
    Scene s = small_scene();
    ImageGrid img = make_image(s, s.window);
    img.values[img.index(3, 5)] = {2.0, 0.0};
    const auto m = image_metrics(img, s);
    EXPECT_EQ(m.peak_ix, 3u);
    EXPECT_EQ(m.peak_iy, 5u);
    EXPECT_NEAR(m.range_fwhm, s.window.spacing, 1e-15);
    EXPECT_NEAR(m.crossrange_fwhm, s.window.spacing, 1e-15);
    EXPECT_FALSE(m.range_clipped);
}

TEST(Metrics, LinearInterpolatedWidth) {
    // profile 0, 0.5, 1, 0.5, 0 along range gives FWHM = 2 cells
    Scene s = small_scene();
    ImageGrid img = make_image(s, s.window);
    const double prof[] = {0.0, 0.5, 1.0, 0.5, 0.0};
    for (int k = 0; k < 5; ++k) img.values[img.index(std::size_t(2 + k), 4)] = prof[k];
    const auto m = image_metrics(img, s);
    EXPECT_NEAR(m.range_fwhm, 2.0 * s.window.spacing, 1e-15);
    EXPECT_NEAR(m.crossrange_fwhm, s.window.spacing, 1e-15);
}

TEST(Metrics, ClippedAtBoundary) {
    Scene s = small_scene();
    ImageGrid img = make_image(s, s.window);
    img.values[img.index(0, 4)] = 1.0;
    img.values[img.index(1, 4)] = 0.9;
    const auto m = image_metrics(img, s);
    EXPECT_TRUE(m.range_clipped);
    EXPECT_FALSE(m.crossrange_clipped);
}

TEST(Metrics, SelfCorrelationIsOne) {
    const Scene s = small_scene();
    const auto img = migrate_broadband(s, array_responses(s), s.window);
    EXPECT_NEAR(image_correlation(img, img), 1.0, 1e-15);
    const auto m = image_metrics(img, s, img);
    ASSERT_TRUE(m.correlation.has_value());
    EXPECT_NEAR(*m.correlation, 1.0, 1e-15);
    EXPECT_GE(m.range_fwhm, s.window.spacing);
    EXPECT_GE(m.crossrange_fwhm, s.window.spacing);
}

TEST(Metrics, ResolutionEstimatesFromScene) {
    const Scene s = paper_scene(PaperCase::point);
    ImageGrid img = make_image(s, s.window);
    img.values[0] = 1.0;
    const auto m = image_metrics(img, s);
    EXPECT_NEAR(m.rayleigh_estimate, s.lambda0() * 50e-3 / 10e-3, 1e-12 * m.rayleigh_estimate);
    EXPECT_NEAR(m.range_estimate, 3e8 / 320e12, 1e-12 * m.range_estimate);
}

TEST(Metrics, DominantMaxima) {
    Scene s = small_scene();
    ImageGrid img = make_image(s, s.window);
    img.values[img.index(2, 2)] = 1.0;
    img.values[img.index(2, 3)] = 0.8;  // shoulder, not a maximum
    img.values[img.index(6, 6)] = 0.7;
    img.values[img.index(8, 0)] = 0.3;  // below half
    const auto mx = dominant_maxima(img, 0.5);
    ASSERT_EQ(mx.size(), 2u);
    EXPECT_EQ(mx[0].ix, 2u);
    EXPECT_EQ(mx[1].ix, 6u);
}

TEST(Spurious, ZeroResponseIsDegenerate) {
    Scene s = small_scene();
    s.scatterers.clear();
    const auto rep = spurious_term_image(s);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_EQ(rep.ratio, 0.0);
}

TEST(Spurious, GeometryWarningAttached) {
    Scene s = small_scene();
    s.source = {10.0, 0.0, 0.0};
    const auto rep = spurious_term_image(s);
    EXPECT_FALSE(rep.geometry_ok);
    EXPECT_FALSE(rep.warning.empty());
}

TEST(Spurious, PaperPresetRatioSmall) {
    const auto rep = spurious_term_image(paper_scene(PaperCase::point));
    EXPECT_TRUE(rep.geometry_ok);
    EXPECT_LT(rep.ratio, 0.05);
}

TEST(Pipeline, PointPresetPeakAndCorrelation) {
    const Scene s = paper_scene(PaperCase::point);
    const auto pair = image_pair(s, recover_all(s, intensity_data(s)), 1);
    EXPECT_EQ(pair.truth_metrics.peak_ix, 25u);
    EXPECT_EQ(pair.truth_metrics.peak_iy, 25u);
    EXPECT_EQ(pair.recovered_metrics.peak_ix, 25u);
    EXPECT_EQ(pair.recovered_metrics.peak_iy, 25u);
    EXPECT_GE(*pair.recovered_metrics.correlation, 0.99);
}

TEST(Pipeline, IlluminationScalingKeepsMetrics) {
    Scene s = paper_scene(PaperCase::point);
    s.window.half_extent = 8;
    const std::vector<double> f2(s.band.count, 0.04);
    const auto a = image_pair(s, recover_all(s, intensity_data(s)), 1);
    const auto b = image_pair(s, recover_all(s, intensity_data(s, f2)), 1);
    EXPECT_EQ(a.recovered_metrics.peak_ix, b.recovered_metrics.peak_ix);
    EXPECT_EQ(a.recovered_metrics.peak_iy, b.recovered_metrics.peak_iy);
    EXPECT_NEAR(a.recovered_metrics.range_fwhm, b.recovered_metrics.range_fwhm, 1e-9 * a.recovered_metrics.range_fwhm);
    EXPECT_NEAR(*a.recovered_metrics.correlation, *b.recovered_metrics.correlation, 1e-9);
}
