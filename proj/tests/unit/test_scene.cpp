#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ikm/scene.hpp"
#include "ikm/scene_io.hpp"
#include "oracles.hpp"

using namespace ikm;

namespace {

const char* kPaperDoc = R"({ "unit": "mm", "dimension": 3, "c0": 3.0e8,
  "receivers": {"linear": {"center":[0,0], "length":10.0, "count":501, "axis":[0,1]}},
  "source": [5.0, -7.5],
  "band": {"f_min_hz": 4.3e14, "f_max_hz": 7.5e14, "count": 100},
  "scatterers": [{"pos":[50.0,0.0], "rho":1e-15}],
  "window": {"center":[50.0,0.0], "spacing_lambda0": 0.4, "half_extent": 25} })";

std::string minimal_doc(const std::string& source) {
    return R"({"unit":"m","dimension":3,"c0":1.0,"receivers":{"explicit":[[0,0]]},"source":)" + source +
           R"(,"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})";
}

} // namespace

TEST(Scene, ParsesPaperDocument) {
    const Scene s = parse_scene(kPaperDoc);
    EXPECT_EQ(s.receiver_count(), 501u);
    EXPECT_EQ(s.dimension, 3);
    EXPECT_DOUBLE_EQ(s.source.x, 5e-3);
    EXPECT_DOUBLE_EQ(s.source.y, -7.5e-3);
    EXPECT_DOUBLE_EQ(s.receivers.front().y, -5e-3);
    EXPECT_DOUBLE_EQ(s.receivers.back().y, 5e-3);
    EXPECT_NEAR(s.receivers[1].y - s.receivers[0].y, 10e-3 / 500, 1e-18);
    EXPECT_EQ(s.scatterers.size(), 1u);
    EXPECT_NEAR(s.window.spacing, s.lambda0() / 2.5, 1e-22);
}

TEST(Scene, DocumentMatchesPreset) {
    const Scene doc = parse_scene(kPaperDoc);
    const Scene preset = paper_scene(PaperCase::point);
    ASSERT_EQ(doc.receiver_count(), preset.receiver_count());
    for (std::size_t r = 0; r < doc.receiver_count(); ++r)
        EXPECT_NEAR(distance(doc.receivers[r], preset.receivers[r]), 0.0, 1e-17);
    EXPECT_EQ(doc.band, preset.band);
    EXPECT_NEAR(distance(doc.source, preset.source), 0.0, 1e-18);
}

TEST(Scene, MinimalScene) {
    const Scene s = parse_scene(minimal_doc("[1,0]"));
    EXPECT_EQ(s.receiver_count(), 1u);
}

TEST(Scene, SourceOnReceiverRejected) {
    try {
        parse_scene(minimal_doc("[0,0]"));
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("source coincides with receiver 1"), std::string::npos) << e.what();
    }
}

TEST(Scene, SourceOnSeventeenthReceiverNamed) {
    std::string doc = R"({"unit":"m","dimension":3,"c0":1.0,"receivers":{"linear":{"center":[0,0],"length":20,"count":21,"axis":[0,1]}},"source":[0,6],"band":{"f_min_hz":1,"f_max_hz":2,"count":2}})";
    try {
        parse_scene(doc);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("receiver 17"), std::string::npos) << e.what();
    }
}

TEST(Scene, SchemaErrorsNameTheField) {
    auto expect_field = [](const std::string& doc, const std::string& field) {
        try {
            parse_scene(doc);
            FAIL() << "accepted: " << doc;
        } catch (const ParseError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    expect_field(R"({"dimension":3,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})", "c0");
    expect_field(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_max_hz":1,"count":1}})", "band.f_min_hz");
    expect_field(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})", "source");
    expect_field(R"({"unit":"ft","dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})", "unit");
    expect_field("{not json", "malformed");
}

TEST(Scene, InvariantViolations) {
    EXPECT_THROW(parse_scene(R"({"dimension":4,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":-1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0],[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":1,"receivers":{"explicit":[]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":1}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":2,"f_max_hz":1,"count":3}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":1,"count":0}})"), ValidationError);
    EXPECT_THROW(parse_scene(R"({"dimension":3,"c0":1,"receivers":{"explicit":[[0,0]]},"source":[1,0],"band":{"f_min_hz":1,"f_max_hz":2,"count":2},"window":{"center":[0,0],"spacing":-1}})"), ValidationError);
}

TEST(Scene, RoundTripPresets) {
    for (auto c : {PaperCase::point, PaperCase::two_points, PaperCase::disk, PaperCase::breakdown_a,
                   PaperCase::breakdown_b, PaperCase::breakdown_c, PaperCase::breakdown_d, PaperCase::stochastic}) {
        const Scene s = paper_scene(c);
        EXPECT_EQ(parse_scene(emit_scene(s)), s);
    }
}

TEST(Scene, RoundTripRandomScenes) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Scene s;
        s.dimension = trial % 2 ? 2 : 3;
        s.coord_dim = trial % 3 ? 2 : 3;
        s.c0 = 1.0 + std::abs(u(gen));
        const int n = 1 + trial % 7;
        for (int r = 0; r < n; ++r)
            s.receivers.push_back({u(gen), u(gen), s.coord_dim == 3 ? u(gen) : 0.0});
        s.source = {10.0 + u(gen), u(gen), 0.0};
        s.scatterers.push_back({{u(gen) + 20.0, u(gen), 0.0}, u(gen) * 1e-3});
        s.band = {1.0 + std::abs(u(gen)), 10.0 + std::abs(u(gen)), std::size_t(1 + trial)};
        s.window = {{20.0, 0.0, 0.0}, 0.1 + std::abs(u(gen)), trial % 5};
        validate(s);
        EXPECT_EQ(parse_scene(emit_scene(s)), s) << "trial " << trial;
    }
}

TEST(Scene, FrequencyGridIsEquispaced) {
    const FrequencyGrid g{430e12, 750e12, 100};
    const auto w = g.samples();
    const double step = w[1] - w[0];
    for (std::size_t i = 1; i < w.size(); ++i) {
        EXPECT_GT(w[i], w[i - 1]);
        EXPECT_NEAR(w[i] - w[i - 1], step, 64 * std::numeric_limits<double>::epsilon() * w.back());
    }
    EXPECT_NEAR(g.delta_omega(), step, 1e-12 * step);
    EXPECT_DOUBLE_EQ(w.front(), 2 * std::numbers::pi * 430e12);
    EXPECT_DOUBLE_EQ(w.back(), 2 * std::numbers::pi * 750e12);
}

TEST(Scene, SingleSampleBand) {
    const FrequencyGrid g{5.0, 5.0, 1};
    EXPECT_EQ(g.samples().size(), 1u);
    EXPECT_EQ(g.delta_omega(), 1.0);
}

TEST(Scene, PaperGeometry) {
    const Scene s = paper_scene(PaperCase::point);
    EXPECT_EQ(s.receiver_count(), 501u);
    EXPECT_NEAR(aperture(s), 10e-3, 1e-15);
    EXPECT_NEAR(distance(array_centroid(s), s.window.center), 50e-3, 1e-12);
    EXPECT_NEAR(s.lambda0(), 3e8 / 590e12, 1e-20);
    EXPECT_EQ(s.window.cell_count(), 51u * 51u);
    ASSERT_EQ(s.scatterers.size(), 1u);
    EXPECT_EQ(s.scatterers[0].reflectivity, 1e-15);
    EXPECT_EQ(paper_scene(PaperCase::breakdown_c).scatterers[0].reflectivity, 1e-10);
    EXPECT_DOUBLE_EQ(paper_scene(PaperCase::breakdown_c).source.y, -75e-3);
}

TEST(Scene, TwoPointPreset) {
    const Scene s = paper_scene(PaperCase::two_points);
    const double l0 = s.lambda0();
    ASSERT_EQ(s.scatterers.size(), 2u);
    EXPECT_DOUBLE_EQ(s.scatterers[0].position.x, 50e-3 - 3 * l0);
    EXPECT_DOUBLE_EQ(s.scatterers[0].position.y, -l0);
    EXPECT_DOUBLE_EQ(s.scatterers[1].position.x, 50e-3 + 6 * l0);
    EXPECT_DOUBLE_EQ(s.scatterers[1].position.y, 5 * l0);
    EXPECT_TRUE(scatterers_inside_window(s));
}

TEST(Scene, UnknownPreset) { EXPECT_THROW(paper_case_from_string("triangle"), ValidationError); }

TEST(Scene, DiskZeroRadius) {
    const auto d = disk_scatterer({1, 2, 0}, 0.0, 0.5, 3.0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].position, (Vec3{1, 2, 0}));
    EXPECT_EQ(d[0].reflectivity, 3.0);
}

TEST(Scene, DiskUnitRadius) {
    const auto d = disk_scatterer({0, 0, 0}, 1.0, 1.0, 1.0);
    EXPECT_EQ(d.size(), 5u);
}

TEST(Scene, DiskRowMajorOrder) {
    const auto d = disk_scatterer({0, 0, 0}, 2.0, 1.0, 1.0);
    for (std::size_t i = 1; i < d.size(); ++i) {
        const auto& a = d[i - 1].position;
        const auto& b = d[i].position;
        EXPECT_TRUE(a.y < b.y || (a.y == b.y && a.x < b.x));
    }
}

TEST(Scene, DiskCountMatchesLattice) {
    const Scene s = paper_scene(PaperCase::disk);
    const double l0 = s.lambda0();
    EXPECT_EQ(s.scatterers.size(), oracle::lattice_count(2.0 * l0, l0 / 4.0));
    for (double r : {0.3, 1.0, 2.5, 3.7, 10.0, 17.2})
        EXPECT_EQ(disk_scatterer({0, 0, 0}, r, 0.37, 1.0).size(), oracle::lattice_count(r, 0.37)) << r;
}

TEST(Scene, DiskPreconditions) {
    EXPECT_THROW(disk_scatterer({}, -1.0, 1.0, 1.0), ValidationError);
    EXPECT_THROW(disk_scatterer({}, 1.0, 0.0, 1.0), ValidationError);
}

TEST(Scene, LinearArrayEndpoints) {
    const auto a = linear_array({0, 0, 0}, 10.0, 501, {0, 1, 0});
    EXPECT_DOUBLE_EQ(a.front().y, -5.0);
    EXPECT_DOUBLE_EQ(a.back().y, 5.0);
    EXPECT_EQ(linear_array({1, 1, 0}, 10.0, 1, {0, 1, 0}).front(), (Vec3{1, 1, 0}));
}

TEST(Scene, HashChangesWithScene) {
    Scene a = paper_scene(PaperCase::point);
    Scene b = a;
    EXPECT_EQ(scene_hash(a), scene_hash(b));
    b.scatterers[0].reflectivity *= 2;
    EXPECT_NE(scene_hash(a), scene_hash(b));
    EXPECT_EQ(scene_hash_hex(a).size(), 16u);
}
