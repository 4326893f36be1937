// ikm: intensity-only Kirchhoff imaging from the command line.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ikm/ikm.hpp"

namespace {

int report(const ikm::CommandResult& res) {
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    if (!res.summary.empty()) std::cout << res.summary.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intensity-only Kirchhoff imaging"};
    app.set_version_flag("--version", std::string(ikm::kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string scene_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    app.add_option("--scene", scene_path, "Scene JSON document");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Seed for all random draws");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* simulate = app.add_subcommand("simulate", "Synthesize intensity or power-spectrum data");
    bool stochastic = false;
    std::optional<double> noise_fraction;
    simulate->add_flag("--stochastic", stochastic, "Random illumination; records power spectra");
    simulate->add_option("--noise-fraction", noise_fraction, "Additive noise power relative to signal power");

    auto* recover = app.add_subcommand("recover", "Recover the projected scattered field from intensity data");
    std::string data_path;
    recover->add_option("--data", data_path, "Intensity CSV (sidecar <name>.illumination.csv alongside)")->required();

    auto* migrate = app.add_subcommand("migrate", "Form a broadband Kirchhoff image of a field file");
    std::string field_path;
    std::optional<std::string> reference;
    migrate->add_option("--field", field_path, "Field CSV")->required();
    migrate->add_option("--reference", reference, "Reference field CSV for correlation and peak displacement");

    auto* experiment = app.add_subcommand("experiment", "Run a preset experiment end to end");
    std::string case_name;
    experiment->add_option("case", case_name, "Preset case")
        ->required()
        ->check(CLI::IsMember(ikm::experiment_cases()));

    auto* condition = app.add_subcommand("condition", "Condition number of the measurement matrix over the band");
    auto* geometry = app.add_subcommand("check-geometry", "Check the geometric imaging condition");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto need = [](const std::string& v, const char* flag) {
        if (v.empty()) throw ikm::ValidationError(std::string(flag) + " is required");
    };

    try {
        need(out_dir, "--out");
        if (!experiment->parsed()) need(scene_path, "--scene");
        if (simulate->parsed()) {
            ikm::SimulateOptions opts{stochastic, seed, noise_fraction};
            return report(ikm::cmd_simulate(scene_path, out_dir, opts));
        }
        if (recover->parsed()) return report(ikm::cmd_recover(scene_path, data_path, out_dir));
        if (migrate->parsed()) {
            std::optional<std::filesystem::path> ref;
            if (reference) ref = *reference;
            return report(ikm::cmd_migrate(scene_path, field_path, out_dir, ref, threads));
        }
        if (experiment->parsed()) return report(ikm::cmd_experiment(case_name, out_dir, seed, threads));
        if (condition->parsed()) return report(ikm::cmd_condition(scene_path, out_dir));
        if (geometry->parsed()) return report(ikm::cmd_check_geometry(scene_path, out_dir));
    } catch (const ikm::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ikm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const ikm::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
