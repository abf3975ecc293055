#include "vortexscale/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vortexscale/flat_norm.hpp"
#include "vortexscale/gl_field.hpp"
#include "vortexscale/multiscale.hpp"
#include "vortexscale/version.hpp"

namespace vortexscale {

namespace {

constexpr std::size_t kMaxGlNodes = 40'000'000;  // about 640 MB of field data

nlohmann::json spectrum_to_json(const ScaleSpectrum& spectrum) {
    return nlohmann::json::parse(spectrum.to_json_string());
}

nlohmann::json run_epsilon(const Scenario& scenario, const RecoveryPlan& plan, double eps,
                           bool with_spectrum, int threads) {
    nlohmann::json out;
    out["epsilon"] = eps;
    const double log_eps = std::abs(std::log(eps));
    try {
        const bool run_cra =
            scenario.model == Model::core_radius || scenario.model == Model::both;
        const bool run_gl =
            scenario.model == Model::ginzburg_landau || scenario.model == Model::both;
        const VortexConfig cfg = build_recovery(plan, eps, scenario.domain);
        out["admissible"] = true;
        out["flat_distance_to_plan"] =
            cfg.mu.empty() && plan.mu.empty() ? 0.0
                                              : flat_norm(cfg.mu - plan.mu, scenario.domain);
        if (run_cra) {
            if (cfg.mu.empty()) {
                out["upper"] = 0.0;
                out["upper_error"] = 0.0;
                out["lower"] = 0.0;
                out["upper_over_log"] = 0.0;
                out["lower_over_log"] = 0.0;
            } else {
                const EnergyEstimate upper = energy_upper(
                    cfg, scenario.domain, eps / scenario.numerics.quad_step_factor, threads);
                const double lower = energy_lower(cfg, scenario.domain);
                out["upper"] = upper.value;
                out["upper_error"] = upper.refinement_error;
                out["lower"] = lower;
                out["upper_over_log"] = upper.value / log_eps;
                out["lower_over_log"] = lower / log_eps;
            }
        }
        if (with_spectrum && !cfg.mu.empty()) {
            const ScaleSpectrum detected =
                detect_spectrum(cfg.mu, eps, scenario.domain, scenario.numerics.s_grid);
            out["spectrum"] = spectrum_to_json(detected);
        }
        if (run_gl) {
            const double h = eps / 4.0;
            const std::size_t nodes =
                (static_cast<std::size_t>(std::llround(scenario.domain.width / h)) + 1) *
                (static_cast<std::size_t>(std::llround(scenario.domain.height / h)) + 1);
            if (nodes > kMaxGlNodes) {
                out["gl"] = {{"status", "skipped: grid of " + std::to_string(nodes) +
                                            " nodes exceeds the in-memory limit"}};
            } else if (cfg.mu.empty()) {
                out["gl"] = {{"status", "ok"}, {"energy", 0.0}, {"energy_over_log", 0.0}};
            } else {
                const GLField field = synthetic_field(plan, eps, scenario.domain, h);
                const double energy = gl_energy(field, Potential::standard());
                nlohmann::json gl{{"status", "ok"},
                                  {"energy", energy},
                                  {"energy_over_log", energy / log_eps}};
                if (!plan.mu.empty()) {
                    const auto first = plan.mu.atoms().front();
                    const DegreeResult deg = degree(field, first.position, 10.0 * eps);
                    gl["first_vortex_degree"] = deg.degree;
                    gl["degree_residual"] = deg.residual;
                }
                out["gl"] = std::move(gl);
            }
        }
        out["status"] = "ok";
    } catch (const std::exception& e) {
        out["status"] = std::string("error: ") + e.what();
        if (!out.contains("admissible")) out["admissible"] = false;
    }
    return out;
}

}  // namespace

std::string resolve_cache_dir(const std::string& explicit_dir) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* env = std::getenv("VORTEXSCALE_CACHE")) {
        if (*env != '\0') return env;
    }
    return ".vortexscale-cache";
}

RunRecord run_scenario(const Scenario& scenario, const RunOptions& options) {
    RunRecord record;
    record.scenario_hash = scenario.hash();
    record.version = kVersion;

    std::filesystem::path cache_file;
    if (!options.cache_dir.empty()) {
        cache_file = std::filesystem::path(options.cache_dir) /
                     (record.scenario_hash + ".json");
        if (std::filesystem::exists(cache_file)) {
            std::ifstream in(cache_file, std::ios::binary);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            record.content = buffer.str();
            record.cache_hit = true;
            return record;
        }
    }

    const RecoveryPlan plan = scenario.plan();
    nlohmann::json content;
    content["scenario_hash"] = record.scenario_hash;
    content["library_version"] = record.version;
    content["scenario"] = nlohmann::json::parse(scenario.canonical_json());
    // Normalized for bitwise reproducibility of records; wall-clock timing
    // belongs to logs, not to the record.
    content["timestamps"] = {{"started", "1970-01-01T00:00:00Z"},
                             {"finished", "1970-01-01T00:00:00Z"}};
    content["predicted_gamma_limit_energy"] = gamma_limit_energy(plan_spectrum(plan));

    nlohmann::json per_eps = nlohmann::json::array();
    const std::size_t n = scenario.epsilon_ladder.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool with_spectrum = (i + 2 >= n);  // the two smallest rungs
        per_eps.push_back(run_epsilon(scenario, plan, scenario.epsilon_ladder[i], with_spectrum,
                                      options.threads));
    }
    content["per_epsilon"] = std::move(per_eps);

    // Trend digest over the successful core-radius rows.
    std::vector<std::pair<double, double>> uppers;  // (1/log, upper_over_log)
    bool decreasing = true;
    double prev = 0.0;
    bool have_prev = false;
    for (const auto& row : content["per_epsilon"]) {
        if (row["status"] == "ok" && row.contains("upper_over_log")) {
            const double value = row["upper_over_log"].get<double>();
            const double x = 1.0 / std::abs(std::log(row["epsilon"].get<double>()));
            uppers.emplace_back(x, value);
            if (have_prev && !(value < prev)) decreasing = false;
            prev = value;
            have_prev = true;
        }
    }
    nlohmann::json trend;
    trend["upper_over_log_decreasing"] = decreasing && uppers.size() >= 2;
    if (uppers.size() >= 2) {
        const auto& a = uppers[uppers.size() - 2];
        const auto& b = uppers[uppers.size() - 1];
        const double slope = (a.second - b.second) / (a.first - b.first);
        trend["extrapolated_upper_over_log"] = b.second - slope * b.first;
    }
    // Jump stability across the two smallest rungs, when both spectra exist.
    std::vector<const nlohmann::json*> spectra;
    for (const auto& row : content["per_epsilon"]) {
        if (row.contains("spectrum")) spectra.push_back(&row["spectrum"]);
    }
    if (spectra.size() == 2) {
        const auto& s1 = (*spectra[0])["S"];
        const auto& s2 = (*spectra[1])["S"];
        bool stable = s1.size() == s2.size();
        if (stable) {
            for (std::size_t k = 0; k < s1.size(); ++k) {
                if (std::abs(s1[k].get<double>() - s2[k].get<double>()) >
                    scenario.numerics.s_grid + 1e-12) {
                    stable = false;
                }
            }
        }
        trend["spectrum_stable_across_ladder"] = stable;
    }
    content["trend"] = std::move(trend);
    record.content = content.dump(2) + "\n";

    if (!options.cache_dir.empty()) {
        std::filesystem::create_directories(options.cache_dir);
        std::ofstream out(cache_file, std::ios::binary);
        out << record.content;
    }
    return record;
}

std::vector<std::string> write_report(const RunRecord& record, const std::string& out_dir,
                                      const std::string& format) {
    std::filesystem::create_directories(out_dir);
    const nlohmann::json content = nlohmann::json::parse(record.content);
    std::vector<std::string> written;
    const std::string stem = (std::filesystem::path(out_dir) / record.scenario_hash).string();

    auto write_file = [&written](const std::string& path, const std::string& bytes) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("write_report: cannot open " + path);
        out << bytes;
        written.push_back(path);
    };

    if (format == "csv" || format == "both") {
        std::ostringstream csv;
        csv.precision(12);
        csv << "epsilon,upper_over_log,lower_over_log,predicted,admissible,status\n";
        const double predicted = content["predicted_gamma_limit_energy"].get<double>();
        for (const auto& row : content["per_epsilon"]) {
            csv << row["epsilon"].get<double>() << ",";
            if (row.contains("upper_over_log")) {
                csv << row["upper_over_log"].get<double>() << ","
                    << row["lower_over_log"].get<double>() << ",";
            } else {
                csv << ",,";
            }
            csv << predicted << "," << (row["admissible"].get<bool>() ? "true" : "false") << ","
                << row["status"].get<std::string>() << "\n";
        }
        if (content["trend"].contains("extrapolated_upper_over_log")) {
            csv << "extrapolated,"
                << content["trend"]["extrapolated_upper_over_log"].get<double>() << ",,"
                << predicted << ",,prediction\n";
        }
        write_file(stem + "_convergence.csv", csv.str());

        std::ostringstream plot;
        plot.precision(12);
        plot << "one_over_log_eps,upper_over_log,lower_over_log\n";
        for (const auto& row : content["per_epsilon"]) {
            if (!row.contains("upper_over_log")) continue;
            plot << 1.0 / std::abs(std::log(row["epsilon"].get<double>())) << ","
                 << row["upper_over_log"].get<double>() << ","
                 << row["lower_over_log"].get<double>() << "\n";
        }
        write_file(stem + "_plotdata.csv", plot.str());
    }
    if (format == "json" || format == "both") {
        write_file(stem + "_record.json", record.content);
    }
    // Spectrum of the smallest rung that carries one.
    for (auto it = content["per_epsilon"].rbegin(); it != content["per_epsilon"].rend(); ++it) {
        if (it->contains("spectrum")) {
            write_file(stem + "_spectrum.json", (*it)["spectrum"].dump(2) + "\n");
            break;
        }
    }
    return written;
}

}  // namespace vortexscale
