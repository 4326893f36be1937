#pragma once

// File formats: intensity CSV + illumination sidecar, field CSV, image CSV/PGM
// and the JSON reports. Numbers are written with 17 significant digits so every
// double round-trips exactly. Files are written to a temporary name and renamed.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "forward.hpp"
#include "migrate.hpp"
#include "recover.hpp"

namespace ikm {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, std::size_t(n));
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

/// Writes `content` to `path` via a sibling temporary file and rename.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

namespace detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string_view>> rows;
    std::string storage;
};

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline CsvTable parse_csv(std::string text, const std::string& what) {
    CsvTable t;
    t.storage = std::move(text);
    std::string_view all(t.storage);
    bool first = true;
    std::size_t lineno = 0;
    while (!all.empty()) {
        const auto nl = all.find('\n');
        std::string_view line = all.substr(0, nl);
        all = nl == std::string_view::npos ? std::string_view{} : all.substr(nl + 1);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = split_commas(line);
        if (first) {
            for (auto c : cells) t.header.emplace_back(c);
            first = false;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(what + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (first) throw ParseError(what + ": empty file");
    return t;
}

inline void expect_header(const CsvTable& t, const std::vector<std::string>& want, const std::string& what) {
    if (t.header != want) {
        std::string w;
        for (const auto& h : want) w += (w.empty() ? "" : ",") + h;
        throw ParseError(what + ": expected header '" + w + "'");
    }
}

inline double to_double(std::string_view s, const std::string& what) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(what + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::size_t to_index(std::string_view s, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(what + ": bad index '" + std::string(s) + "'");
    return v;
}

// Checks that (freq_index, receiver_index) rows form a complete sorted grid.
inline void check_grid_order(std::size_t row, std::size_t fi, std::size_t ri, std::size_t n, const std::string& what) {
    if (fi != row / n || ri != row % n)
        throw ParseError(what + ": row " + std::to_string(row + 2) + " out of order (expected freq_index " +
                         std::to_string(row / n) + ", receiver_index " + std::to_string(row % n) + ")");
}

} // namespace detail

// ---- intensity data -------------------------------------------------------

inline std::string intensity_csv(const IntensityData& d) {
    std::string s = "freq_index,omega_rad_s,receiver_index,value\n";
    for (std::size_t i = 0; i < d.frequency_count(); ++i) {
        const std::string w = format_double(d.omegas[i]);
        for (std::size_t r = 0; r < d.rows[i].size(); ++r)
            s += std::to_string(i) + ',' + w + ',' + std::to_string(r) + ',' + format_double(d.rows[i][r]) + '\n';
    }
    return s;
}

inline std::string illumination_csv(const IntensityData& d) {
    std::string s = std::string("freq_index,omega_rad_s,") + (d.stochastic ? "twopi_Fhat" : "fhat_sq") + '\n';
    for (std::size_t i = 0; i < d.frequency_count(); ++i)
        s += std::to_string(i) + ',' + format_double(d.omegas[i]) + ',' + format_double(d.illumination[i]) + '\n';
    return s;
}

/// Parses the intensity CSV and its illumination sidecar. `receivers` is the expected N.
inline IntensityData parse_intensity(const std::string& data_text, const std::string& sidecar_text,
                                     std::size_t receivers) {
    if (receivers == 0) throw ValidationError("parse_intensity: receiver count must be positive");
    const auto t = detail::parse_csv(data_text, "intensity data");
    detail::expect_header(t, {"freq_index", "omega_rad_s", "receiver_index", "value"}, "intensity data");
    if (t.rows.size() % receivers != 0)
        throw ValidationError("intensity data: " + std::to_string(t.rows.size()) + " rows is not a multiple of " +
                              std::to_string(receivers) + " receivers");
    IntensityData d;
    const std::size_t nf = t.rows.size() / receivers;
    d.omegas.resize(nf);
    d.rows.assign(nf, std::vector<double>(receivers));
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& c = t.rows[k];
        const std::size_t fi = detail::to_index(c[0], "intensity data");
        const std::size_t ri = detail::to_index(c[2], "intensity data");
        detail::check_grid_order(k, fi, ri, receivers, "intensity data");
        const double w = detail::to_double(c[1], "intensity data");
        if (ri == 0) d.omegas[fi] = w;
        else if (w != d.omegas[fi])
            throw ParseError("intensity data: inconsistent omega for freq_index " + std::to_string(fi));
        d.rows[fi][ri] = detail::to_double(c[3], "intensity data");
    }

    const auto s = detail::parse_csv(sidecar_text, "illumination sidecar");
    if (s.header.size() != 3 || s.header[0] != "freq_index" || s.header[1] != "omega_rad_s" ||
        (s.header[2] != "twopi_Fhat" && s.header[2] != "fhat_sq"))
        throw ParseError("illumination sidecar: expected header 'freq_index,omega_rad_s,twopi_Fhat' or "
                         "'freq_index,omega_rad_s,fhat_sq'");
    d.stochastic = s.header[2] == "twopi_Fhat";
    if (s.rows.size() != nf)
        throw ValidationError("illumination sidecar has " + std::to_string(s.rows.size()) + " rows, data has " +
                              std::to_string(nf) + " frequencies");
    d.illumination.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        if (detail::to_index(s.rows[i][0], "illumination sidecar") != i)
            throw ParseError("illumination sidecar: row " + std::to_string(i + 2) + " out of order");
        if (detail::to_double(s.rows[i][1], "illumination sidecar") != d.omegas[i])
            throw ValidationError("illumination sidecar: omega mismatch at freq_index " + std::to_string(i));
        d.illumination[i] = detail::to_double(s.rows[i][2], "illumination sidecar");
    }
    return d;
}

// ---- complex fields -------------------------------------------------------

inline std::string field_csv(const std::vector<double>& omegas, const std::vector<FieldVector>& fields) {
    std::string s = "freq_index,omega_rad_s,receiver_index,re,im\n";
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string w = format_double(omegas[i]);
        for (std::size_t r = 0; r < fields[i].size(); ++r)
            s += std::to_string(i) + ',' + w + ',' + std::to_string(r) + ',' + format_double(fields[i][r].real()) +
                 ',' + format_double(fields[i][r].imag()) + '\n';
    }
    return s;
}

struct FieldSet {
    std::vector<double> omegas;
    std::vector<FieldVector> fields;
};

inline FieldSet parse_fields(const std::string& text, std::size_t receivers) {
    if (receivers == 0) throw ValidationError("parse_fields: receiver count must be positive");
    const auto t = detail::parse_csv(text, "field file");
    detail::expect_header(t, {"freq_index", "omega_rad_s", "receiver_index", "re", "im"}, "field file");
    if (t.rows.size() % receivers != 0)
        throw ValidationError("field file: " + std::to_string(t.rows.size()) + " rows is not a multiple of " +
                              std::to_string(receivers) + " receivers");
    const std::size_t nf = t.rows.size() / receivers;
    FieldSet fs;
    fs.omegas.resize(nf);
    fs.fields.assign(nf, FieldVector{std::vector<Complex>(receivers), FieldRole::other});
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& c = t.rows[k];
        const std::size_t fi = detail::to_index(c[0], "field file");
        const std::size_t ri = detail::to_index(c[2], "field file");
        detail::check_grid_order(k, fi, ri, receivers, "field file");
        const double w = detail::to_double(c[1], "field file");
        if (ri == 0) fs.omegas[fi] = w;
        else if (w != fs.omegas[fi])
            throw ParseError("field file: inconsistent omega for freq_index " + std::to_string(fi));
        fs.fields[fi][ri] = {detail::to_double(c[3], "field file"), detail::to_double(c[4], "field file")};
    }
    return fs;
}

/// Checks that a field set covers exactly the scene's frequency grid.
inline void check_covers_grid(const FieldSet& fs, const Scene& scene) {
    if (fs.omegas.size() != scene.band.count)
        throw ValidationError("field file has " + std::to_string(fs.omegas.size()) + " frequencies, scene band has " +
                              std::to_string(scene.band.count));
    for (std::size_t i = 0; i < fs.omegas.size(); ++i) {
        const double w = scene.band.omega(i);
        if (std::abs(fs.omegas[i] - w) > 1e-12 * w)
            throw ValidationError("field file: frequency " + std::to_string(i) + " does not match the scene grid");
    }
}

// ---- images ---------------------------------------------------------------

inline std::string image_csv(const ImageGrid& img) {
    std::string s = "ix,iy,x_m,y_m,re,im,abs\n";
    for (std::size_t iy = 0; iy < img.ny(); ++iy)
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            const Vec3 p = img.window.point(ix, iy);
            const bool f = img.is_flagged(ix, iy);
            const Complex v = img.at(ix, iy);
            s += std::to_string(ix) + ',' + std::to_string(iy) + ',' + format_double(p.x) + ',' + format_double(p.y) +
                 ',' + (f ? "nan" : format_double(v.real())) + ',' + (f ? "nan" : format_double(v.imag())) + ',' +
                 (f ? "nan" : format_double(std::abs(v))) + '\n';
        }
    return s;
}

/// Parses an image CSV back into values over `window` (flagged cells come back as NaN).
inline ImageGrid parse_image_csv(const std::string& text, const ImageWindowSpec& window) {
    const auto t = detail::parse_csv(text, "image file");
    detail::expect_header(t, {"ix", "iy", "x_m", "y_m", "re", "im", "abs"}, "image file");
    ImageGrid img;
    img.window = window;
    img.values.assign(window.cell_count(), Complex{});
    img.flagged.assign(window.cell_count(), 0);
    if (t.rows.size() != window.cell_count())
        throw ValidationError("image file has " + std::to_string(t.rows.size()) + " cells, window has " +
                              std::to_string(window.cell_count()));
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& c = t.rows[k];
        const std::size_t ix = detail::to_index(c[0], "image file");
        const std::size_t iy = detail::to_index(c[1], "image file");
        if (img.index(ix, iy) != k) throw ParseError("image file: row " + std::to_string(k + 2) + " out of order");
        const double re = detail::to_double(c[4], "image file");
        const double im = detail::to_double(c[5], "image file");
        if (std::isnan(re) || std::isnan(im)) img.flagged[k] = 1;
        else img.values[k] = {re, im};
    }
    return img;
}

/// 8-bit plain PGM of |Gamma|, min-max normalized over valid cells. The top row is
/// the largest cross-range index. Flagged cells are 0; a constant image is 255 when
/// nonzero and 0 when zero.
inline std::string image_pgm(const ImageGrid& img) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < img.values.size(); ++c) {
        if (img.flagged[c]) continue;
        lo = std::min(lo, std::abs(img.values[c]));
        hi = std::max(hi, std::abs(img.values[c]));
    }
    const double range = hi - lo;
    std::string s = "P2\n" + std::to_string(img.nx()) + ' ' + std::to_string(img.ny()) + "\n255\n";
    for (std::size_t row = 0; row < img.ny(); ++row) {
        const std::size_t iy = img.ny() - 1 - row;
        for (std::size_t ix = 0; ix < img.nx(); ++ix) {
            int level = 0;
            if (img.is_flagged(ix, iy)) level = 0;
            else if (range > 0.0) level = int(std::lround(255.0 * (std::abs(img.at(ix, iy)) - lo) / range));
            else if (hi > 0.0) level = 255;  // constant nonzero image
            s += std::to_string(level);
            s += ix + 1 < img.nx() ? ' ' : '\n';
        }
    }
    return s;
}

/// Two images side by side with a one-pixel gap, each normalized separately.
inline std::string side_by_side_pgm(const ImageGrid& left, const ImageGrid& right) {
    auto levels = [](const std::string& pgm) {
        std::istringstream in(pgm);
        std::string magic;
        std::size_t w = 0, h = 0, maxv = 0;
        in >> magic >> w >> h >> maxv;
        std::vector<int> v(w * h);
        for (auto& x : v) in >> x;
        return std::pair{w, v};
    };
    const auto [wl, l] = levels(image_pgm(left));
    const auto [wr, r] = levels(image_pgm(right));
    const std::size_t h = left.ny();
    if (right.ny() != h) throw ValidationError("side_by_side_pgm: image heights differ");
    const std::size_t w = wl + 1 + wr;
    std::string s = "P2\n" + std::to_string(w) + ' ' + std::to_string(h) + "\n255\n";
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < wl; ++x) s += std::to_string(l[y * wl + x]) + ' ';
        s += "255";
        for (std::size_t x = 0; x < wr; ++x) s += ' ' + std::to_string(r[y * wr + x]);
        s += '\n';
    }
    return s;
}

// ---- reports --------------------------------------------------------------

namespace detail {
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }
} // namespace detail

inline nlohmann::json metrics_json(const ImageMetrics& m) {
    using nlohmann::json;
    json j;
    j["degenerate"] = m.degenerate;
    j["peak_cell"] = {m.peak_ix, m.peak_iy};
    j["peak_m"] = {m.peak_position.x, m.peak_position.y};
    j["peak_value"] = m.peak_value;
    j["crossrange_fwhm_m"] = m.degenerate ? json() : json(m.crossrange_fwhm);
    j["range_fwhm_m"] = m.degenerate ? json() : json(m.range_fwhm);
    j["crossrange_clipped"] = m.crossrange_clipped;
    j["range_clipped"] = m.range_clipped;
    j["rayleigh_estimate_m"] = detail::finite_or_null(m.rayleigh_estimate);
    j["range_estimate_m"] = detail::finite_or_null(m.range_estimate);
    j["correlation"] = m.correlation ? json(*m.correlation) : json();
    return j;
}

inline nlohmann::json geometry_json(const GeometryReport& g) {
    return {{"ok", g.ok}, {"violating_receivers", g.violating_receivers}, {"tolerance_rad", g.tolerance_rad}};
}

inline nlohmann::json condition_json(const Scene& scene, const std::vector<RecoveredField>& rec,
                                     const GeometryReport& geo) {
    nlohmann::json freqs = nlohmann::json::array();
    for (const auto& r : rec)
        freqs.push_back({{"omega", r.omega}, {"cond", r.conditioning}, {"residual_norm", r.residual_norm}});
    return {{"dimension", scene.dimension},
            {"frequencies", freqs},
            {"geometry", geometry_json(geo)},
            {"linearization_residual", linearization_residual_band(scene)}};
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + '\n'; }

} // namespace ikm
