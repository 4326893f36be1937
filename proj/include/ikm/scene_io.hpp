#pragma once

// JSON scene documents. Example:
//
// { "unit": "mm", "dimension": 3, "c0": 3.0e8,
//   "receivers": {"linear": {"center":[0,0], "length":10.0, "count":501, "axis":[0,1]}},
//   "source": [5.0, -7.5],
//   "band": {"f_min_hz": 4.3e14, "f_max_hz": 7.5e14, "count": 100},
//   "scatterers": [{"pos":[50.0,0.0], "rho":1e-15}],
//   "window": {"center":[50.0,0.0], "spacing_lambda0": 0.4, "half_extent": 25} }
//
// Receivers may also be listed with {"explicit": [[..], [..]]}. The window may give
// "spacing" (document units) instead of "spacing_lambda0".

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "scene.hpp"

namespace ikm {

namespace detail {

using json = nlohmann::json;

inline double unit_scale(const std::string& unit) {
    if (unit == "m") return 1.0;
    if (unit == "mm") return 1e-3;
    if (unit == "um") return 1e-6;
    if (unit == "nm") return 1e-9;
    throw ParseError("unit: unknown unit '" + unit + "' (expected m, mm, um or nm)");
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + "." + key + ": missing field");
    return obj.at(key);
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
    return v.get<std::int64_t>();
}

inline Vec3 position(const json& v, int& coord_dim, double scale, const std::string& where) {
    if (!v.is_array() || (v.size() != 2 && v.size() != 3))
        throw ParseError(where + ": expected an array of 2 or 3 numbers");
    const int n = int(v.size());
    if (coord_dim == 0) coord_dim = n;
    if (n != coord_dim) throw ParseError(where + ": mixed 2D and 3D coordinates");
    Vec3 p;
    p.x = number(v[0], where + "[0]") * scale;
    p.y = number(v[1], where + "[1]") * scale;
    if (n == 3) p.z = number(v[2], where + "[2]") * scale;
    return p;
}

inline json to_json(const Vec3& p, int coord_dim) {
    if (coord_dim == 3) return json::array({p.x, p.y, p.z});
    return json::array({p.x, p.y});
}

} // namespace detail

/// Parses and validates a scene document. Throws ParseError (schema) or ValidationError (invariants).
inline Scene parse_scene(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scene: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scene: top-level value must be an object");

    std::string unit = "mm";
    if (doc.contains("unit")) {
        if (!doc.at("unit").is_string()) throw ParseError("unit: expected a string");
        unit = doc.at("unit").get<std::string>();
    }
    const double scale = detail::unit_scale(unit);

    Scene s;
    s.coord_dim = 0;
    s.dimension = int(detail::integer(detail::require(doc, "dimension", "scene"), "dimension"));
    s.c0 = detail::number(detail::require(doc, "c0", "scene"), "c0");

    const auto& rec = detail::require(doc, "receivers", "scene");
    if (rec.contains("linear")) {
        const auto& lin = rec.at("linear");
        const Vec3 center = detail::position(detail::require(lin, "center", "receivers.linear"), s.coord_dim, scale,
                                             "receivers.linear.center");
        const double length = detail::number(detail::require(lin, "length", "receivers.linear"),
                                             "receivers.linear.length") * scale;
        const auto count = detail::integer(detail::require(lin, "count", "receivers.linear"), "receivers.linear.count");
        if (count < 1) throw ValidationError("receivers.linear.count: must be >= 1");
        int axis_dim = s.coord_dim;
        const Vec3 axis = detail::position(detail::require(lin, "axis", "receivers.linear"), axis_dim, 1.0,
                                           "receivers.linear.axis");
        s.receivers = linear_array(center, length, std::size_t(count), axis);
    } else if (rec.contains("explicit")) {
        const auto& list = rec.at("explicit");
        if (!list.is_array()) throw ParseError("receivers.explicit: expected an array of positions");
        for (std::size_t i = 0; i < list.size(); ++i)
            s.receivers.push_back(
                detail::position(list[i], s.coord_dim, scale, "receivers.explicit[" + std::to_string(i) + "]"));
    } else {
        throw ParseError("receivers: expected 'linear' or 'explicit'");
    }

    s.source = detail::position(detail::require(doc, "source", "scene"), s.coord_dim, scale, "source");

    const auto& band = detail::require(doc, "band", "scene");
    s.band.f_min_hz = detail::number(detail::require(band, "f_min_hz", "band"), "band.f_min_hz");
    s.band.f_max_hz = detail::number(detail::require(band, "f_max_hz", "band"), "band.f_max_hz");
    const auto count = detail::integer(detail::require(band, "count", "band"), "band.count");
    if (count < 1) throw ValidationError("band.count: must be >= 1");
    s.band.count = std::size_t(count);

    if (doc.contains("scatterers")) {
        const auto& list = doc.at("scatterers");
        if (!list.is_array()) throw ParseError("scatterers: expected an array");
        for (std::size_t j = 0; j < list.size(); ++j) {
            const std::string where = "scatterers[" + std::to_string(j) + "]";
            PointScatterer p;
            p.position = detail::position(detail::require(list[j], "pos", where), s.coord_dim, scale, where + ".pos");
            p.reflectivity = detail::number(detail::require(list[j], "rho", where), where + ".rho");
            s.scatterers.push_back(p);
        }
    }

    // lambda0 needs a valid band
    validate(s.band);
    if (!(s.c0 > 0.0)) throw ValidationError("c0 must be positive");
    s.window.spacing = s.lambda0() / 2.5;
    s.window.half_extent = 25;
    if (doc.contains("window")) {
        const auto& w = doc.at("window");
        s.window.center = detail::position(detail::require(w, "center", "window"), s.coord_dim, scale, "window.center");
        if (w.contains("spacing_lambda0") && w.contains("spacing"))
            throw ParseError("window: give either spacing or spacing_lambda0, not both");
        if (w.contains("spacing_lambda0"))
            s.window.spacing = detail::number(w.at("spacing_lambda0"), "window.spacing_lambda0") * s.lambda0();
        else if (w.contains("spacing"))
            s.window.spacing = detail::number(w.at("spacing"), "window.spacing") * scale;
        if (w.contains("half_extent"))
            s.window.half_extent = int(detail::integer(w.at("half_extent"), "window.half_extent"));
    }
    if (s.coord_dim == 0) s.coord_dim = 2;

    validate(s);
    return s;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

/// Canonical document: SI units, explicit receivers, window spacing in meters.
/// parse_scene(emit_scene(s)) == s for every validated scene.
inline std::string emit_scene(const Scene& s) {
    using detail::json;
    json doc;
    doc["unit"] = "m";
    doc["dimension"] = s.dimension;
    doc["c0"] = s.c0;
    json rec = json::array();
    for (const auto& r : s.receivers) rec.push_back(detail::to_json(r, s.coord_dim));
    doc["receivers"] = {{"explicit", rec}};
    doc["source"] = detail::to_json(s.source, s.coord_dim);
    doc["band"] = {{"f_min_hz", s.band.f_min_hz}, {"f_max_hz", s.band.f_max_hz}, {"count", s.band.count}};
    json sc = json::array();
    for (const auto& p : s.scatterers)
        sc.push_back({{"pos", detail::to_json(p.position, s.coord_dim)}, {"rho", p.reflectivity}});
    doc["scatterers"] = sc;
    doc["window"] = {{"center", detail::to_json(s.window.center, s.coord_dim)},
                     {"spacing", s.window.spacing},
                     {"half_extent", s.window.half_extent}};
    return doc.dump(2);
}

/// FNV-1a over the canonical document.
inline std::uint64_t scene_hash(const Scene& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : emit_scene(s)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string scene_hash_hex(const Scene& s) {
    static constexpr char digits[] = "0123456789abcdef";
    std::uint64_t h = scene_hash(s);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[std::size_t(i)] = digits[h & 0xf];
    return out;
}

} // namespace ikm
