#pragma once

// End-to-end commands behind the ikm command-line tool. Each command reads its
// inputs, writes its outputs plus a manifest.json into one directory, and returns
// a summary with any warnings.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "forward.hpp"
#include "io.hpp"
#include "migrate.hpp"
#include "recover.hpp"
#include "scene.hpp"
#include "scene_io.hpp"
#include "stochastic.hpp"

namespace ikm {

inline constexpr const char* kVersion = "1.0.0";

struct CommandResult {
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> outputs;
    nlohmann::json summary = nlohmann::json::object();
};

namespace detail {

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Manifest {
public:
    Manifest(std::string command, std::filesystem::path out_dir)
        : out_(std::move(out_dir)), started_(utc_now()) {
        doc_["tool"] = "ikm";
        doc_["version"] = kVersion;
        doc_["command"] = std::move(command);
        doc_["seed"] = nullptr;
        doc_["inputs"] = nlohmann::json::object();
        doc_["outputs"] = nlohmann::json::array();
        doc_["parameters"] = nlohmann::json::object();
    }

    void scene(const Scene& s) { doc_["scene_hash"] = scene_hash_hex(s); }
    void seed(std::optional<std::uint64_t> s) {
        if (s) doc_["seed"] = *s;
    }
    void input(const std::string& key, const std::filesystem::path& p) { doc_["inputs"][key] = p.string(); }
    template <class T>
    void parameter(const std::string& key, const T& v) {
        doc_["parameters"][key] = v;
    }

    void write(const std::string& name, std::string_view content, CommandResult& res) {
        const auto path = out_ / name;
        write_atomic(path, content);
        doc_["outputs"].push_back(name);
        res.outputs.push_back(path);
    }

    void finish(CommandResult& res) {
        doc_["started_utc"] = started_;
        doc_["finished_utc"] = utc_now();
        doc_["warnings"] = res.warnings;
        write_atomic(out_ / "manifest.json", dump_json(doc_));
        res.outputs.push_back(out_ / "manifest.json");
    }

private:
    std::filesystem::path out_;
    std::string started_;
    nlohmann::json doc_;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& data) {
    auto p = data;
    p.replace_extension();
    p += ".illumination.csv";
    return p;
}

} // namespace detail

// ---- in-process building blocks -------------------------------------------

struct SimulateOptions {
    bool stochastic = false;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_fraction;
};

inline void validate(const SimulateOptions& o) {
    if (o.noise_fraction && !o.stochastic) throw ValidationError("--noise-fraction requires --stochastic");
    if (o.stochastic && !o.seed) throw ValidationError("--stochastic requires --seed");
    if (o.noise_fraction && !(*o.noise_fraction >= 0.0 && std::isfinite(*o.noise_fraction)))
        throw ValidationError("--noise-fraction must be a finite value >= 0");
}

inline IntensityData simulate_data(const Scene& scene, const SimulateOptions& o) {
    validate(o);
    if (!o.stochastic) return intensity_data(scene);
    const auto draw = sample_illumination(band_spectrum(scene.band), scene.band, *o.seed);
    if (o.noise_fraction) return noisy_power_data(scene, draw, *o.noise_fraction, *o.seed);
    return clean_power_data(scene, draw);
}

struct ImagePair {
    ImageGrid truth;      // Gamma[p]
    ImageGrid recovered;  // Gamma[p~]
    ImageMetrics truth_metrics;
    ImageMetrics recovered_metrics;
};

inline ImagePair image_pair(const Scene& scene, const std::vector<RecoveredField>& rec, unsigned threads) {
    ImagePair out{migrate_broadband(scene, array_responses(scene), scene.window, threads),
                  migrate_broadband(scene, recovered_fields(rec), scene.window, threads),
                  {},
                  {}};
    out.truth_metrics = image_metrics(out.truth, scene);
    out.recovered_metrics = image_metrics(out.recovered, scene, out.truth);
    return out;
}

// ---- commands -------------------------------------------------------------

inline CommandResult cmd_simulate(const std::filesystem::path& scene_path, const std::filesystem::path& out_dir,
                                  const SimulateOptions& opts) {
    validate(opts);
    const Scene scene = load_scene(scene_path.string());
    CommandResult res;
    if (!scatterers_inside_window(scene)) res.warnings.push_back("scatterer outside the image window");
    detail::Manifest man("simulate", out_dir);
    man.scene(scene);
    man.seed(opts.seed);
    man.input("scene", scene_path);
    man.parameter("stochastic", opts.stochastic);
    if (opts.noise_fraction) man.parameter("noise_fraction", *opts.noise_fraction);

    const auto data = simulate_data(scene, opts);
    man.write("intensity.csv", intensity_csv(data), res);
    man.write("intensity.illumination.csv", illumination_csv(data), res);
    man.finish(res);
    res.summary = {{"frequencies", data.frequency_count()}, {"receivers", scene.receiver_count()}};
    return res;
}

inline CommandResult cmd_recover(const std::filesystem::path& scene_path, const std::filesystem::path& data_path,
                                 const std::filesystem::path& out_dir) {
    const Scene scene = load_scene(scene_path.string());
    const auto sidecar = detail::sidecar_path(data_path);
    const auto data = parse_intensity(read_text(data_path), read_text(sidecar), scene.receiver_count());
    for (std::size_t i = 0; i < data.frequency_count(); ++i)
        if (!(data.illumination[i] != 0.0))
            throw NumericError("recover: zero illumination power at freq_index " + std::to_string(i));
    const auto rec = recover_all(scene, data);
    const auto geo = check_geometric_condition(scene);

    CommandResult res;
    if (!geo.ok)
        res.warnings.push_back("geometric imaging condition violated at " +
                               std::to_string(geo.violating_receivers.size()) + " receiver(s)");
    detail::Manifest man("recover", out_dir);
    man.scene(scene);
    man.input("scene", scene_path);
    man.input("data", data_path);
    man.input("illumination", sidecar);
    man.write("recovered.csv", field_csv(data.omegas, recovered_fields(rec)), res);
    man.write("condition.json", dump_json(condition_json(scene, rec, geo)), res);
    man.finish(res);
    res.summary = {{"geometry_ok", geo.ok}, {"frequencies", rec.size()}};
    return res;
}

inline CommandResult cmd_migrate(const std::filesystem::path& scene_path, const std::filesystem::path& field_path,
                                 const std::filesystem::path& out_dir,
                                 const std::optional<std::filesystem::path>& reference_path, unsigned threads) {
    const Scene scene = load_scene(scene_path.string());
    auto fs = parse_fields(read_text(field_path), scene.receiver_count());
    check_covers_grid(fs, scene);
    const auto image = migrate_broadband(scene, fs.fields, scene.window, threads);
    auto metrics = image_metrics(image, scene);

    CommandResult res;
    detail::Manifest man("migrate", out_dir);
    man.scene(scene);
    man.input("scene", scene_path);
    man.input("field", field_path);
    man.parameter("threads", threads);

    nlohmann::json mj;
    if (reference_path) {
        man.input("reference", *reference_path);
        auto rs = parse_fields(read_text(*reference_path), scene.receiver_count());
        check_covers_grid(rs, scene);
        const auto ref = migrate_broadband(scene, rs.fields, scene.window, threads);
        const auto rm = image_metrics(ref, scene);
        metrics.correlation = image_correlation(image, ref);
        mj = metrics_json(metrics);
        mj["reference_peak_cell"] = {rm.peak_ix, rm.peak_iy};
        mj["peak_displacement_cells"] = cell_distance(metrics.peak_ix, metrics.peak_iy, rm.peak_ix, rm.peak_iy);
        man.write("reference.pgm", image_pgm(ref), res);
    } else {
        mj = metrics_json(metrics);
    }
    if (metrics.degenerate) res.warnings.push_back("image is identically zero");
    man.write("image.csv", image_csv(image), res);
    man.write("image.pgm", image_pgm(image), res);
    man.write("metrics.json", dump_json(mj), res);
    man.finish(res);
    res.summary = mj;
    return res;
}

/// Condition number of M at every band frequency plus the geometry report.
inline nlohmann::json condition_report(const Scene& scene) {
    nlohmann::json freqs = nlohmann::json::array();
    for (std::size_t i = 0; i < scene.band.count; ++i) {
        const double w = scene.band.omega(i);
        freqs.push_back({{"omega", w}, {"cond", condition_number(scene, w)}});
    }
    return {{"dimension", scene.dimension},
            {"frequencies", freqs},
            {"geometry", geometry_json(check_geometric_condition(scene))}};
}

inline CommandResult cmd_condition(const std::filesystem::path& scene_path, const std::filesystem::path& out_dir) {
    const Scene scene = load_scene(scene_path.string());
    CommandResult res;
    detail::Manifest man("condition", out_dir);
    man.scene(scene);
    man.input("scene", scene_path);
    const auto rep = condition_report(scene);
    man.write("condition.json", dump_json(rep), res);
    man.finish(res);
    res.summary = rep["geometry"];
    return res;
}

inline CommandResult cmd_check_geometry(const std::filesystem::path& scene_path, const std::filesystem::path& out_dir) {
    const Scene scene = load_scene(scene_path.string());
    const auto geo = check_geometric_condition(scene);
    CommandResult res;
    if (!geo.ok)
        res.warnings.push_back("geometric imaging condition violated at " +
                               std::to_string(geo.violating_receivers.size()) + " receiver(s)");
    detail::Manifest man("check-geometry", out_dir);
    man.scene(scene);
    man.input("scene", scene_path);
    man.write("geometry.json", dump_json(geometry_json(geo)), res);
    man.finish(res);
    res.summary = geometry_json(geo);
    return res;
}

// ---- preset experiments ---------------------------------------------------

inline const std::vector<std::string>& experiment_cases() {
    static const std::vector<std::string> cases{"point",       "two_points",  "disk",        "stochastic",
                                                "stochastic_noisy", "breakdown_a", "breakdown_b", "breakdown_c",
                                                "breakdown_d", "condition_study", "spurious_term"};
    return cases;
}

/// Scene with every frequency multiplied by `factor` and the same geometry.
inline Scene scaled_band(Scene s, double factor) {
    s.band.f_min_hz *= factor;
    s.band.f_max_hz *= factor;
    return s;
}

/// Condition number versus frequency for the d = 2 and d = 3 Green's functions on
/// the point geometry. Frequencies run log-spaced from k r_min = 1 up to the top
/// of the band; limit_d2 is sqrt(max distance / min distance).
inline std::string condition_study_csv(const Scene& base, std::size_t samples = 200) {
    double rmin = distance(base.receivers.front(), base.source);
    double rmax = rmin;
    for (const auto& x : base.receivers) {
        rmin = std::min(rmin, distance(x, base.source));
        rmax = std::max(rmax, distance(x, base.source));
    }
    Scene d2 = base;
    d2.dimension = 2;
    Scene d3 = base;
    d3.dimension = 3;
    const double w_lo = base.c0 / rmin;
    const double w_hi = base.band.omega_max();
    const double limit = std::sqrt(rmax / rmin);
    std::string s = "omega_rad_s,k_rmin,cond_d2,cond_d3,limit_d2\n";
    for (std::size_t i = 0; i < samples; ++i) {
        const double w = w_lo * std::pow(w_hi / w_lo, double(i) / double(samples - 1));
        s += format_double(w) + ',' + format_double(w * rmin / base.c0) + ',' +
             format_double(condition_number(d2, w)) + ',' + format_double(condition_number(d3, w)) + ',' +
             format_double(limit) + '\n';
    }
    return s;
}

inline CommandResult cmd_experiment(const std::string& name, const std::filesystem::path& out_dir,
                                    std::optional<std::uint64_t> seed, unsigned threads) {
    CommandResult res;
    detail::Manifest man("experiment " + name, out_dir);
    man.seed(seed);
    man.parameter("case", name);
    man.parameter("threads", threads);

    if (name == "condition_study") {
        const Scene scene = paper_scene(PaperCase::point);
        man.scene(scene);
        man.write("condition_study.csv", condition_study_csv(scene), res);
        man.finish(res);
        return res;
    }

    if (name == "spurious_term") {
        const Scene scene = paper_scene(PaperCase::point);
        man.scene(scene);
        const auto base = spurious_term_image(scene, threads);
        const auto doubled = spurious_term_image(scaled_band(scene, 2.0), threads);
        if (!base.geometry_ok) res.warnings.push_back(base.warning);
        const nlohmann::json rep = {
            {"ratio", base.ratio},       {"max_spurious", base.max_spurious}, {"max_true", base.max_true},
            {"degenerate", base.degenerate}, {"geometry_ok", base.geometry_ok},
            {"doubled_band_ratio", doubled.ratio}};
        man.write("spurious_term.json", dump_json(rep), res);
        man.finish(res);
        res.summary = rep;
        return res;
    }

    const bool stochastic = name == "stochastic" || name == "stochastic_noisy";
    const Scene scene = paper_scene(stochastic ? PaperCase::stochastic : paper_case_from_string(name));
    SimulateOptions opts;
    if (stochastic) {
        if (!seed) throw ValidationError("experiment " + name + " requires --seed");
        opts.stochastic = true;
        opts.seed = seed;
        if (name == "stochastic_noisy") opts.noise_fraction = 0.1;
    }
    man.scene(scene);
    man.write("scene.json", emit_scene(scene) + '\n', res);

    const auto data = simulate_data(scene, opts);
    man.write("intensity.csv", intensity_csv(data), res);
    man.write("intensity.illumination.csv", illumination_csv(data), res);

    const auto rec = recover_all(scene, data);
    const auto geo = check_geometric_condition(scene);
    if (!geo.ok)
        res.warnings.push_back("geometric imaging condition violated at " +
                               std::to_string(geo.violating_receivers.size()) + " receiver(s)");
    man.write("recovered.csv", field_csv(data.omegas, recovered_fields(rec)), res);
    man.write("true_field.csv", field_csv(data.omegas, array_responses(scene)), res);
    auto cond = condition_json(scene, rec, geo);
    man.write("condition.json", dump_json(cond), res);

    const auto pair = image_pair(scene, rec, threads);
    man.write("image_p.csv", image_csv(pair.truth), res);
    man.write("image_ptilde.csv", image_csv(pair.recovered), res);
    man.write("image_p.pgm", image_pgm(pair.truth), res);
    man.write("image_ptilde.pgm", image_pgm(pair.recovered), res);
    man.write("side_by_side.pgm", side_by_side_pgm(pair.truth, pair.recovered), res);
    man.write("metrics_p.json", dump_json(metrics_json(pair.truth_metrics)), res);
    auto rm = metrics_json(pair.recovered_metrics);
    rm["peak_displacement_cells"] = cell_distance(pair.recovered_metrics.peak_ix, pair.recovered_metrics.peak_iy,
                                                  pair.truth_metrics.peak_ix, pair.truth_metrics.peak_iy);
    man.write("metrics_ptilde.json", dump_json(rm), res);
    man.finish(res);

    res.summary = {{"linearization_residual", cond["linearization_residual"]},
                   {"geometry_ok", geo.ok},
                   {"correlation", rm["correlation"]},
                   {"peak_displacement_cells", rm["peak_displacement_cells"]}};
    return res;
}

} // namespace ikm
