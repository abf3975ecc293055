#include "vortexscale/atomic_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace vortexscale {

namespace {
constexpr double kZeroWeight = 1e-14;
}

AtomicMeasure::AtomicMeasure(std::vector<WeightedAtom> atoms) {
    // Merge coincident atoms (within tolerance), drop zero weights, sort by
    // position so equal measures have equal representations.
    std::vector<WeightedAtom> merged;
    for (const auto& atom : atoms) {
        if (!std::isfinite(atom.position.x) || !std::isfinite(atom.position.y) ||
            !std::isfinite(atom.weight)) {
            throw std::invalid_argument("AtomicMeasure: non-finite atom");
        }
        bool absorbed = false;
        for (auto& existing : merged) {
            if (distance(existing.position, atom.position) < kMergeTolerance) {
                existing.weight += atom.weight;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(atom);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const WeightedAtom& a) {
                                    return std::abs(a.weight) <= kZeroWeight;
                                }),
                 merged.end());
    std::sort(merged.begin(), merged.end(), [](const WeightedAtom& a, const WeightedAtom& b) {
        if (a.position.x != b.position.x) return a.position.x < b.position.x;
        return a.position.y < b.position.y;
    });
    atoms_ = std::move(merged);
}

double AtomicMeasure::total_weight() const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.weight;
    return sum;
}

double AtomicMeasure::total_variation() const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += std::abs(a.weight);
    return sum;
}

double AtomicMeasure::weight_in(const Ball& ball, double tol) const {
    double sum = 0.0;
    for (const auto& a : atoms_) {
        if (ball.contains_point(a.position, tol)) sum += a.weight;
    }
    return sum;
}

AtomicMeasure AtomicMeasure::restricted_to(const Ball& ball, double tol) const {
    std::vector<WeightedAtom> kept;
    for (const auto& a : atoms_) {
        if (ball.contains_point(a.position, tol)) kept.push_back(a);
    }
    return AtomicMeasure(std::move(kept));
}

AtomicMeasure AtomicMeasure::absolute() const {
    std::vector<WeightedAtom> abs_atoms = atoms_;
    for (auto& a : abs_atoms) a.weight = std::abs(a.weight);
    return AtomicMeasure(std::move(abs_atoms));
}

bool AtomicMeasure::integer_weighted(double tol) const {
    for (const auto& a : atoms_) {
        if (std::abs(a.weight - std::round(a.weight)) > tol) return false;
    }
    return true;
}

bool AtomicMeasure::supported_inside(const Rect& domain) const {
    for (const auto& a : atoms_) {
        if (!domain.strictly_inside(a.position)) return false;
    }
    return true;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
    std::vector<WeightedAtom> scaled_atoms = atoms_;
    for (auto& a : scaled_atoms) a.weight *= factor;
    return AtomicMeasure(std::move(scaled_atoms));
}

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b) {
    std::vector<WeightedAtom> all = a.atoms_;
    all.insert(all.end(), b.atoms_.begin(), b.atoms_.end());
    return AtomicMeasure(std::move(all));
}

AtomicMeasure operator-(const AtomicMeasure& a, const AtomicMeasure& b) {
    return a + b.scaled(-1.0);
}

std::string AtomicMeasure::to_json_string() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : atoms_) {
        list.push_back({{"x", a.position.x}, {"y", a.position.y}, {"w", a.weight}});
    }
    return list.dump();
}

AtomicMeasure AtomicMeasure::from_json_string(const std::string& text) {
    const auto parsed = nlohmann::json::parse(text);
    if (!parsed.is_array()) {
        throw std::invalid_argument("AtomicMeasure: expected a JSON list of {x, y, w}");
    }
    std::vector<WeightedAtom> atoms;
    for (const auto& item : parsed) {
        atoms.push_back(WeightedAtom{{item.at("x").get<double>(), item.at("y").get<double>()},
                                     item.at("w").get<double>()});
    }
    return AtomicMeasure(std::move(atoms));
}

}  // namespace vortexscale
