#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vortexscale/runner.hpp"
#include "vortexscale/scenario.hpp"

using namespace vortexscale;

namespace {

const char* kSmallScenario = R"({
  "domain": {"x0": 0, "y0": 0, "width": 2, "height": 2},
  "vortices": [{"x": 1.0, "y": 1.0, "w": 1}],
  "clusters": [],
  "epsilon_ladder": [1e-2, 3e-3],
  "model": "core_radius"
})";

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("scenario parsing and canonical hashing") {
    const Scenario s = Scenario::from_json_text(kSmallScenario);
    CHECK(s.domain.width == 2.0);
    CHECK(s.vortices.size() == 1);
    CHECK(s.epsilon_ladder.size() == 2);
    CHECK(s.model == Model::core_radius);
    CHECK(s.numerics.s_grid == doctest::Approx(1.0 / 64.0));
    CHECK(!s.hash().empty());
    // Hash changes with content.
    Scenario t = s;
    t.epsilon_ladder.push_back(1e-3);
    CHECK(t.hash() != s.hash());
}

TEST_CASE("validation reports path-qualified issues") {
    const char* bad = R"({
      "domain": {"x0": 0, "y0": 0, "width": -1, "height": 2},
      "vortices": [{"x": 5.0, "y": 1.0, "w": 1.5}],
      "clusters": [{"x": 1.0, "y": 1.0, "s": 1.2, "multiplicity": 3}],
      "epsilon_ladder": [1e-3, 1e-2],
      "model": "quantum"
    })";
    try {
        Scenario::from_json_text(bad);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        auto has = [&e](const std::string& needle) {
            for (const auto& issue : e.issues) {
                if (issue.find(needle) != std::string::npos) return true;
            }
            return false;
        };
        CHECK(has("domain.width"));
        CHECK(has("vortices[0].w"));
        CHECK(has("vortices[0]:"));
        CHECK(has("clusters[0].s"));
        CHECK(has("clusters[0].multiplicity"));
        CHECK(has("epsilon_ladder[1]"));
        CHECK(has("model"));
    }
}

TEST_CASE("empty scenario produces zero energies and prediction") {
    const char* empty = R"({
      "domain": {"x0": 0, "y0": 0, "width": 2, "height": 2},
      "epsilon_ladder": [1e-2],
      "model": "core_radius"
    })";
    const Scenario s = Scenario::from_json_text(empty);
    const RunRecord record = run_scenario(s, {});
    CHECK(record.content.find("\"predicted_gamma_limit_energy\": 0.0") != std::string::npos);
    CHECK(record.content.find("\"upper\": 0.0") != std::string::npos);
    CHECK(record.content.find("\"lower\": 0.0") != std::string::npos);
}

TEST_CASE("run record carries energies, prediction and trend") {
    const Scenario s = Scenario::from_json_text(kSmallScenario);
    const RunRecord record = run_scenario(s, {});
    CHECK(record.version == std::string("0.1.0"));
    CHECK(record.content.find("per_epsilon") != std::string::npos);
    CHECK(record.content.find("upper_over_log") != std::string::npos);
    CHECK(record.content.find("spectrum") != std::string::npos);
    CHECK(record.content.find("extrapolated_upper_over_log") != std::string::npos);
}

TEST_CASE("vortex plus half-scale cluster predicts two pi") {
    const char* text = R"({
      "domain": {"x0": 0, "y0": 0, "width": 2, "height": 2},
      "vortices": [{"x": 1.4, "y": 1.4, "w": 1}],
      "clusters": [{"x": 0.6, "y": 0.6, "s": 0.5, "multiplicity": 2}],
      "epsilon_ladder": [3e-3],
      "model": "core_radius"
    })";
    const Scenario s = Scenario::from_json_text(text);
    const RunRecord record = run_scenario(s, {});
    const double predicted = 2.0 * 3.14159265358979323846;
    const auto pos = record.content.find("predicted_gamma_limit_energy");
    REQUIRE(pos != std::string::npos);
    const double value = std::stod(record.content.substr(pos + 31, 18));
    CHECK(value == doctest::Approx(predicted).epsilon(1e-9));
}

TEST_CASE("cache: repeated runs hit and match byte for byte") {
    const auto cache = fresh_dir("vxs_cache_test");
    const Scenario s = Scenario::from_json_text(kSmallScenario);
    RunOptions options;
    options.cache_dir = cache.string();
    const RunRecord first = run_scenario(s, options);
    CHECK(!first.cache_hit);
    const RunRecord second = run_scenario(s, options);
    CHECK(second.cache_hit);
    CHECK(first.content == second.content);

    // A fresh cache reproduces the same bytes.
    const auto cache2 = fresh_dir("vxs_cache_test2");
    options.cache_dir = cache2.string();
    const RunRecord third = run_scenario(s, options);
    CHECK(!third.cache_hit);
    CHECK(third.content == first.content);
    std::filesystem::remove_all(cache);
    std::filesystem::remove_all(cache2);
}

TEST_CASE("reports: csv rows, prediction row, spectrum json, plot data") {
    const auto out = fresh_dir("vxs_report_test");
    const Scenario s = Scenario::from_json_text(kSmallScenario);
    const RunRecord record = run_scenario(s, {});
    const auto files = write_report(record, out.string(), "both");
    REQUIRE(files.size() >= 3);

    std::ifstream csv(out / (record.scenario_hash + "_convergence.csv"));
    REQUIRE(csv.good());
    std::string line;
    int rows = 0;
    bool extrapolated = false;
    std::getline(csv, line);
    CHECK(line == "epsilon,upper_over_log,lower_over_log,predicted,admissible,status");
    while (std::getline(csv, line)) {
        if (line.rfind("extrapolated", 0) == 0) {
            extrapolated = true;
        } else if (!line.empty()) {
            ++rows;
        }
    }
    CHECK(rows == 2);  // one per ladder rung
    CHECK(extrapolated);

    CHECK(std::filesystem::exists(out / (record.scenario_hash + "_spectrum.json")));
    CHECK(std::filesystem::exists(out / (record.scenario_hash + "_plotdata.csv")));
    CHECK(std::filesystem::exists(out / (record.scenario_hash + "_record.json")));
    std::filesystem::remove_all(out);
}

TEST_CASE("partial failures keep the run alive with per-rung status") {
    // The second rung is too large for the cluster separation rule, the
    // first still succeeds.
    const char* text = R"({
      "domain": {"x0": 0, "y0": 0, "width": 2, "height": 2},
      "clusters": [{"x": 1.0, "y": 1.0, "s": 0.45, "multiplicity": 2}],
      "epsilon_ladder": [4e-3, 3.2e-3],
      "model": "core_radius"
    })";
    Scenario s = Scenario::from_json_text(text);
    s.epsilon_ladder = {2.6e-1, 4e-3};  // the first rung is inadmissible
    const RunRecord record = run_scenario(s, {});
    CHECK(record.content.find("\"status\": \"ok\"") != std::string::npos);
    CHECK(record.content.find("error:") != std::string::npos);
}

TEST_CASE("ginzburg-landau model rows carry field energies and degrees") {
    const char* text = R"({
      "domain": {"x0": 0, "y0": 0, "width": 2, "height": 2},
      "vortices": [{"x": 1.0, "y": 1.0, "w": 1}],
      "epsilon_ladder": [1e-2],
      "model": "both"
    })";
    const Scenario s = Scenario::from_json_text(text);
    const RunRecord record = run_scenario(s, {});
    CHECK(record.content.find("\"gl\"") != std::string::npos);
    CHECK(record.content.find("energy_over_log") != std::string::npos);
    CHECK(record.content.find("\"first_vortex_degree\": 1") != std::string::npos);
    // Both model families report on the same rung.
    CHECK(record.content.find("upper_over_log") != std::string::npos);
}

TEST_CASE("cache location resolution order") {
    CHECK(resolve_cache_dir("explicit") == "explicit");
    const std::string fallback = resolve_cache_dir("");
    CHECK(!fallback.empty());
}
