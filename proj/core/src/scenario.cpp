#include "vortexscale/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vortexscale {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::ostringstream out;
    out << "scenario validation failed:";
    for (const auto& issue : issues) out << "\n  - " << issue;
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> the_issues)
    : std::runtime_error(join_issues(the_issues)), issues(std::move(the_issues)) {}

std::string model_name(Model model) {
    switch (model) {
        case Model::core_radius: return "core_radius";
        case Model::ginzburg_landau: return "ginzburg_landau";
        case Model::both: return "both";
    }
    return "core_radius";
}

RecoveryPlan Scenario::plan() const {
    RecoveryPlan p;
    p.mu = AtomicMeasure(vortices);
    p.clusters = clusters;
    return p;
}

std::string Scenario::canonical_json() const {
    nlohmann::json out;
    out["domain"] = {{"x0", domain.x0},
                     {"y0", domain.y0},
                     {"width", domain.width},
                     {"height", domain.height}};
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : vortices) {
        vs.push_back({{"x", v.position.x}, {"y", v.position.y}, {"w", v.weight}});
    }
    out["vortices"] = std::move(vs);
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : clusters) {
        cs.push_back({{"x", c.location.x},
                      {"y", c.location.y},
                      {"s", c.exponent},
                      {"multiplicity", c.multiplicity}});
    }
    out["clusters"] = std::move(cs);
    out["epsilon_ladder"] = epsilon_ladder;
    out["model"] = model_name(model);
    out["numerics"] = {{"s_grid", numerics.s_grid},
                       {"quad_step_factor", numerics.quad_step_factor},
                       {"mollifier", numerics.mollifier},
                       {"tolerances", {{"sandwich_margin", numerics.sandwich_margin}}}};
    return out.dump();
}

std::string Scenario::hash() const {
    const std::string bytes = canonical_json();
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

Scenario Scenario::from_json_text(const std::string& text) {
    std::vector<std::string> issues;
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError({std::string("json parse error: ") + e.what()});
    }
    Scenario scenario;
    auto get_number = [&issues](const std::string& path, const nlohmann::json& node,
                                const char* key, double fallback, bool required) -> double {
        if (!node.contains(key)) {
            if (required) issues.push_back(path + "." + key + ": missing");
            return fallback;
        }
        if (!node[key].is_number()) {
            issues.push_back(path + "." + key + ": not a number");
            return fallback;
        }
        return node[key].get<double>();
    };

    if (!parsed.contains("domain") || !parsed["domain"].is_object()) {
        issues.push_back("domain: missing object {x0, y0, width, height}");
    } else {
        const auto& d = parsed["domain"];
        scenario.domain.x0 = get_number("domain", d, "x0", 0.0, true);
        scenario.domain.y0 = get_number("domain", d, "y0", 0.0, true);
        scenario.domain.width = get_number("domain", d, "width", 1.0, true);
        scenario.domain.height = get_number("domain", d, "height", 1.0, true);
        if (!(scenario.domain.width > 0.0)) issues.push_back("domain.width: must be positive");
        if (!(scenario.domain.height > 0.0)) issues.push_back("domain.height: must be positive");
    }

    if (parsed.contains("vortices")) {
        if (!parsed["vortices"].is_array()) {
            issues.push_back("vortices: must be a list of {x, y, w}");
        } else {
            int idx = 0;
            for (const auto& item : parsed["vortices"]) {
                const std::string path = "vortices[" + std::to_string(idx) + "]";
                WeightedAtom atom;
                atom.position.x = get_number(path, item, "x", 0.0, true);
                atom.position.y = get_number(path, item, "y", 0.0, true);
                atom.weight = get_number(path, item, "w", 1.0, true);
                if (std::abs(atom.weight - std::llround(atom.weight)) > 1e-9) {
                    issues.push_back(path + ".w: must be an integer");
                }
                if (!scenario.domain.strictly_inside(atom.position)) {
                    issues.push_back(path + ": position not strictly inside the domain");
                }
                scenario.vortices.push_back(atom);
                ++idx;
            }
        }
    }

    if (parsed.contains("clusters")) {
        if (!parsed["clusters"].is_array()) {
            issues.push_back("clusters: must be a list of {x, y, s, multiplicity}");
        } else {
            int idx = 0;
            for (const auto& item : parsed["clusters"]) {
                const std::string path = "clusters[" + std::to_string(idx) + "]";
                ClusterSpec cluster;
                cluster.location.x = get_number(path, item, "x", 0.0, true);
                cluster.location.y = get_number(path, item, "y", 0.0, true);
                cluster.exponent = get_number(path, item, "s", 0.0, true);
                cluster.multiplicity =
                    static_cast<int>(get_number(path, item, "multiplicity", 2.0, true));
                if (cluster.exponent < 0.0 || cluster.exponent >= 1.0) {
                    issues.push_back(path + ".s: exponent must lie in [0, 1)");
                }
                if (cluster.multiplicity <= 0 || cluster.multiplicity % 2 != 0) {
                    issues.push_back(path + ".multiplicity: must be a positive even integer");
                }
                if (!scenario.domain.strictly_inside(cluster.location)) {
                    issues.push_back(path + ": location not strictly inside the domain");
                }
                scenario.clusters.push_back(cluster);
                ++idx;
            }
        }
    }

    if (!parsed.contains("epsilon_ladder") || !parsed["epsilon_ladder"].is_array() ||
        parsed["epsilon_ladder"].empty()) {
        issues.push_back("epsilon_ladder: must be a nonempty decreasing list");
    } else {
        for (const auto& item : parsed["epsilon_ladder"]) {
            if (!item.is_number()) {
                issues.push_back("epsilon_ladder: entries must be numbers");
                break;
            }
            scenario.epsilon_ladder.push_back(item.get<double>());
        }
        for (std::size_t i = 0; i < scenario.epsilon_ladder.size(); ++i) {
            if (!(scenario.epsilon_ladder[i] > 0.0) || scenario.epsilon_ladder[i] >= 1.0) {
                issues.push_back("epsilon_ladder[" + std::to_string(i) +
                                 "]: must lie in (0, 1)");
            }
            if (i > 0 && !(scenario.epsilon_ladder[i] < scenario.epsilon_ladder[i - 1])) {
                issues.push_back("epsilon_ladder[" + std::to_string(i) +
                                 "]: ladder must be strictly decreasing");
            }
        }
    }

    if (parsed.contains("model")) {
        const std::string name = parsed["model"].is_string() ? parsed["model"].get<std::string>()
                                                             : std::string();
        if (name == "core_radius") {
            scenario.model = Model::core_radius;
        } else if (name == "ginzburg_landau") {
            scenario.model = Model::ginzburg_landau;
        } else if (name == "both") {
            scenario.model = Model::both;
        } else {
            issues.push_back("model: must be one of core_radius | ginzburg_landau | both");
        }
    }

    if (parsed.contains("numerics")) {
        const auto& n = parsed["numerics"];
        if (!n.is_object()) {
            issues.push_back("numerics: must be an object");
        } else {
            scenario.numerics.s_grid = get_number("numerics", n, "s_grid", 1.0 / 64.0, false);
            scenario.numerics.quad_step_factor =
                get_number("numerics", n, "quad_step_factor", 4.0, false);
            if (n.contains("mollifier")) {
                if (!n["mollifier"].is_string() ||
                    n["mollifier"].get<std::string>() != "standard_bump") {
                    issues.push_back("numerics.mollifier: only standard_bump is available");
                } else {
                    scenario.numerics.mollifier = n["mollifier"].get<std::string>();
                }
            }
            if (n.contains("tolerances")) {
                scenario.numerics.sandwich_margin =
                    get_number("numerics.tolerances", n["tolerances"], "sandwich_margin", 1e-6,
                               false);
            }
            if (!(scenario.numerics.s_grid > 0.0) || scenario.numerics.s_grid > 0.25) {
                issues.push_back("numerics.s_grid: must lie in (0, 0.25]");
            }
            if (scenario.numerics.quad_step_factor < 4.0) {
                issues.push_back("numerics.quad_step_factor: must be at least 4 (step <= eps/4)");
            }
        }
    }

    // Cross-field checks: every atom of the built configurations must stay
    // separated; cluster multiplicities already keep nu = |mu| + 2 xi even.
    for (std::size_t i = 0; i < scenario.clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < scenario.clusters.size(); ++j) {
            if (distance(scenario.clusters[i].location, scenario.clusters[j].location) <
                1e-12) {
                issues.push_back("clusters[" + std::to_string(j) +
                                 "]: coincides with clusters[" + std::to_string(i) + "]");
            }
        }
        for (std::size_t v = 0; v < scenario.vortices.size(); ++v) {
            if (distance(scenario.clusters[i].location, scenario.vortices[v].position) < 1e-12) {
                issues.push_back("clusters[" + std::to_string(i) + "]: coincides with vortices[" +
                                 std::to_string(v) + "]");
            }
        }
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return scenario;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot open scenario file: " + path});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

}  // namespace vortexscale
