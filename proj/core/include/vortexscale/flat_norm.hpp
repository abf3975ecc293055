#pragma once

#include <string>
#include <vector>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/geometry.hpp"

namespace vortexscale {

/// Optimal test data for the flat norm of an atomic measure: values of the
/// test function at the atoms, its Lipschitz constant, and the validation of
/// the McShane extension certifying that an admissible test function with
/// these atom values exists.
struct FlatNormSolution {
    double value{0.0};
    std::vector<double> psi;
    double lipschitz{0.0};
    bool certificate_valid{false};
    double certificate_error{0.0};
};

/// Flat norm of mu over the domain: the dual norm against compactly
/// supported Lipschitz test functions with sup|psi| + Lip(psi) <= 1,
/// computed as a linear program over the atom values and the Lipschitz
/// constant. Throws if an atom lies on or outside the domain boundary.
double flat_norm(const AtomicMeasure& mu, const Rect& domain);

FlatNormSolution flat_norm_certified(const AtomicMeasure& mu, const Rect& domain);

/// Report of the ball-localization flat-distance bound: if alpha is
/// supported in the domain-contained balls, beta in all balls, and they
/// agree on every contained ball, then
///   ||alpha - beta||_flat <= 2 * Rad(balls) * (|alpha| + |beta|)(domain).
struct BallLocalizationReport {
    double lhs{0.0};
    double rhs{0.0};
    bool pass{false};
    bool assumptions_hold{false};
    std::string diagnostic;
};

BallLocalizationReport flat_distance_bound_check(const AtomicMeasure& alpha,
                                                 const AtomicMeasure& beta,
                                                 const std::vector<Ball>& balls,
                                                 const Rect& domain);

}  // namespace vortexscale
