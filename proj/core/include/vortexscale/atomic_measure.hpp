#pragma once

#include <string>
#include <vector>

#include "vortexscale/geometry.hpp"

namespace vortexscale {

struct WeightedAtom {
    Point position;
    double weight{0.0};
};

/// Finite signed sum of weighted Dirac masses. Construction canonicalizes:
/// atoms closer than 1e-12 are merged by summing weights and zero weights are
/// dropped, so positions are pairwise distinct afterwards. Immutable.
class AtomicMeasure {
public:
    AtomicMeasure() = default;
    explicit AtomicMeasure(std::vector<WeightedAtom> atoms);

    static AtomicMeasure dirac(Point position, double weight) {
        return AtomicMeasure({WeightedAtom{position, weight}});
    }

    const std::vector<WeightedAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    /// mu(R^2)
    double total_weight() const;
    /// |mu|(R^2) = sum of |w_i|
    double total_variation() const;
    /// mu(B), closed ball with tolerance.
    double weight_in(const Ball& ball, double tol = kGeomTol) const;
    AtomicMeasure restricted_to(const Ball& ball, double tol = kGeomTol) const;
    AtomicMeasure absolute() const;

    bool integer_weighted(double tol = 1e-9) const;
    bool supported_inside(const Rect& domain) const;

    AtomicMeasure scaled(double factor) const;
    friend AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b);
    friend AtomicMeasure operator-(const AtomicMeasure& a, const AtomicMeasure& b);

    /// Serialized as a JSON list of {x, y, w}.
    std::string to_json_string() const;
    static AtomicMeasure from_json_string(const std::string& text);

    static constexpr double kMergeTolerance = 1e-12;

private:
    std::vector<WeightedAtom> atoms_;
};

}  // namespace vortexscale
