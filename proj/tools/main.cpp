#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vortexscale/flat_norm.hpp"
#include "vortexscale/multiscale.hpp"
#include "vortexscale/runner.hpp"
#include "vortexscale/scenario.hpp"
#include "vortexscale/version.hpp"

namespace {

using namespace vortexscale;

int cmd_analyze(const std::string& scenario_path, const std::string& out_dir,
                const std::string& format, const std::string& cache_dir, int threads) {
    const Scenario scenario = Scenario::from_file(scenario_path);
    RunOptions options;
    options.cache_dir = resolve_cache_dir(cache_dir);
    options.threads = threads;
    const RunRecord record = run_scenario(scenario, options);
    std::cerr << (record.cache_hit ? "cache hit" : "computed") << " scenario "
              << record.scenario_hash << "\n";
    for (const auto& path : write_report(record, out_dir, format)) {
        std::cout << path << "\n";
    }
    return 0;
}

int cmd_spectrum(const std::string& scenario_path, double epsilon, const std::string& out_dir,
                 bool to_stdout) {
    const Scenario scenario = Scenario::from_file(scenario_path);
    const VortexConfig cfg = build_recovery(scenario.plan(), epsilon, scenario.domain);
    const ScaleSpectrum spectrum =
        detect_spectrum(cfg.mu, epsilon, scenario.domain, scenario.numerics.s_grid);
    const std::string body = spectrum.to_json_string() + "\n";
    if (to_stdout) {
        std::cout << body;
    } else {
        std::filesystem::create_directories(out_dir);
        const std::string path =
            (std::filesystem::path(out_dir) / (scenario.hash() + "_spectrum.json")).string();
        std::ofstream out(path);
        out << body;
        std::cout << path << "\n";
    }
    return 0;
}

int cmd_gamma_check(const std::string& scenario_path, int threads) {
    const Scenario scenario = Scenario::from_file(scenario_path);
    const ExperimentTable table = gamma_convergence_experiment(
        scenario.plan(), scenario.epsilon_ladder, scenario.domain,
        scenario.numerics.quad_step_factor, threads);
    std::cout << table.to_csv();
    const double predicted = table.rows.empty() ? 0.0 : table.rows.front().predicted;
    bool sandwich = true;
    for (const auto& row : table.rows) {
        if (row.ok && row.lower > row.upper + row.upper_error + 1e-9) sandwich = false;
    }
    std::cerr << "predicted gamma limit energy: " << predicted << "\n"
              << "upper trend decreasing: " << (table.upper_trend_decreasing ? "yes" : "no")
              << "\n"
              << "extrapolated upper/|log eps|: " << table.extrapolated_upper << "\n"
              << "sandwich lower <= upper: " << (sandwich ? "yes" : "no") << "\n";
    return (sandwich && table.upper_trend_decreasing) ? 0 : 1;
}

int cmd_flatnorm(const std::string& measure_path) {
    std::ifstream in(measure_path);
    if (!in) {
        std::cerr << "cannot open " << measure_path << "\n";
        return 1;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto parsed = nlohmann::json::parse(buffer.str());
    Rect domain;
    nlohmann::json atoms;
    if (parsed.is_array()) {
        std::cerr << "measure file must be {\"domain\": {x0,y0,width,height}, \"measure\": "
                     "[{x,y,w}...]}\n";
        return 1;
    }
    const auto& d = parsed.at("domain");
    domain = Rect{d.at("x0").get<double>(), d.at("y0").get<double>(),
                  d.at("width").get<double>(), d.at("height").get<double>()};
    atoms = parsed.at("measure");
    const AtomicMeasure mu = AtomicMeasure::from_json_string(atoms.dump());
    const FlatNormSolution sol = flat_norm_certified(mu, domain);
    nlohmann::json out{{"flat_norm", sol.value},
                       {"lipschitz", sol.lipschitz},
                       {"certificate_valid", sol.certificate_valid},
                       {"certificate_error", sol.certificate_error},
                       {"total_variation", mu.total_variation()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale vortex energetics: ball-construction bounds, flat norms, "
                 "scale spectra and energy scaling experiments"};
    app.set_version_flag("--version", vortexscale::kVersion);
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::string format = "both";
    std::string cache_dir;
    int threads = 0;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format, "report format: csv | json | both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    app.add_option("--cache", cache_dir,
                   "cache directory (default: $VORTEXSCALE_CACHE or .vortexscale-cache)");
    app.add_option("--threads", threads, "quadrature worker threads (0 = hardware)");

    std::string scenario_path;
    auto* analyze = app.add_subcommand("analyze", "run a scenario and write reports");
    analyze->add_option("scenario", scenario_path, "scenario JSON file")->required();

    std::string spectrum_scenario;
    double spectrum_eps = 1e-3;
    bool spectrum_stdout = false;
    auto* spectrum = app.add_subcommand("spectrum", "detect the scale spectrum at one epsilon");
    spectrum->add_option("scenario", spectrum_scenario, "scenario JSON file")->required();
    spectrum->add_option("--epsilon", spectrum_eps, "core radius")->required();
    spectrum->add_flag("--stdout", spectrum_stdout, "print instead of writing a file");

    std::string gamma_scenario;
    auto* gamma = app.add_subcommand("gamma-check",
                                     "run the energy ladder and check the scaling trends");
    gamma->add_option("scenario", gamma_scenario, "scenario JSON file")->required();

    std::string measure_path;
    auto* flatnorm = app.add_subcommand("flatnorm", "flat norm of an atomic measure file");
    flatnorm->add_option("measure", measure_path, "JSON file {domain, measure}")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            return cmd_analyze(scenario_path, out_dir, format, cache_dir, threads);
        }
        if (spectrum->parsed()) {
            return cmd_spectrum(spectrum_scenario, spectrum_eps, out_dir, spectrum_stdout);
        }
        if (gamma->parsed()) return cmd_gamma_check(gamma_scenario, threads);
        if (flatnorm->parsed()) return cmd_flatnorm(measure_path);
    } catch (const vortexscale::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
