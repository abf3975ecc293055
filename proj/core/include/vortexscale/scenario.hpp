#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vortexscale/core_radius.hpp"
#include "vortexscale/geometry.hpp"

namespace vortexscale {

struct Numerics {
    double s_grid{1.0 / 64.0};
    double quad_step_factor{4.0};
    std::string mollifier{"standard_bump"};
    double sandwich_margin{1e-6};
};

enum class Model { core_radius, ginzburg_landau, both };

/// Declarative experiment description: domain, vortices, dipole clusters
/// with scale exponents, epsilon ladder, model selection and numerics.
struct Scenario {
    Rect domain;
    std::vector<WeightedAtom> vortices;
    std::vector<ClusterSpec> clusters;
    std::vector<double> epsilon_ladder;
    Model model{Model::core_radius};
    Numerics numerics;

    RecoveryPlan plan() const;
    /// Canonical serialization (sorted keys); hashing and caching use these
    /// exact bytes.
    std::string canonical_json() const;
    std::string hash() const;  // fnv1a-64 of the canonical serialization

    static Scenario from_json_text(const std::string& text);
    static Scenario from_file(const std::string& path);
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> issues);
    std::vector<std::string> issues;
};

std::string model_name(Model model);

}  // namespace vortexscale
