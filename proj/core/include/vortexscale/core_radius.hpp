#pragma once

#include <string>
#include <vector>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/ball_construction.hpp"
#include "vortexscale/geometry.hpp"
#include "vortexscale/multiscale.hpp"

namespace vortexscale {

/// Admissible singularity configuration at core radius epsilon: integer
/// weights, every atom at least 2*eps from the boundary and atoms pairwise
/// at least 4*eps apart.
struct VortexConfig {
    AtomicMeasure mu;
    double epsilon{0.0};
};

struct AdmissibilityReport {
    bool admissible{false};
    std::vector<std::string> violations;
};

AdmissibilityReport check_admissible(const AtomicMeasure& mu, double epsilon, const Rect& domain);

/// Superposition phase of the configuration: gradient(p) is the sum of
/// z_i * (p - x_i)^perp / |p - x_i|^2, curl-free away from the atoms with
/// circulation 2*pi*z_i around atom i.
class PhaseField {
public:
    explicit PhaseField(AtomicMeasure mu) : mu_(std::move(mu)) {}

    Vec2 gradient(Point p) const;
    /// Discrete loop integral of gradient . tangent over a circle.
    double circulation(Point center, double radius, int samples = 256) const;
    const AtomicMeasure& measure() const { return mu_; }

private:
    AtomicMeasure mu_;
};

struct EnergyEstimate {
    double value{0.0};
    double refinement_error{0.0};
};

/// Upper bound for the drilled Dirichlet energy: midpoint quadrature of
/// (1/2)|grad phase|^2 over the domain minus the eps-disks. Cells crossed by
/// a disk boundary are subdivided to depth 4 and only sub-midpoints outside
/// the disks contribute. grid_step must be at most eps/4.
EnergyEstimate energy_upper(const VortexConfig& cfg, const Rect& domain, double grid_step,
                            int threads = 0);

/// Ball-construction lower bound on initial balls of radius eps around the
/// atoms, dyadic partition refined by the containment exit times, horizon at
/// the time the largest ball reaches the domain diameter.
double energy_lower(const VortexConfig& cfg, const Rect& domain);

struct ClusterSpec {
    Point location;
    double exponent{0.0};  // in [0, 1)
    int multiplicity{2};   // positive even
};

/// Declarative limit data: unit-weight vortices plus dipole clusters with
/// scale exponents. The zero-exponent separation rule is 2/|log eps|.
struct RecoveryPlan {
    AtomicMeasure mu;
    std::vector<ClusterSpec> clusters;
};

/// Builds the finite-eps configuration realizing the plan: each cluster of
/// multiplicity 2m becomes m horizontal dipoles of separation 2*eps^s
/// (2/|log eps| at exponent zero). Verifies admissibility.
VortexConfig build_recovery(const RecoveryPlan& plan, double epsilon, const Rect& domain);

/// The spectrum the plan prescribes (no construction run).
ScaleSpectrum plan_spectrum(const RecoveryPlan& plan);

struct ExperimentRow {
    double epsilon{0.0};
    bool admissible{false};
    bool ok{false};
    std::string error;
    double upper{0.0};
    double upper_error{0.0};
    double lower{0.0};
    double upper_over_log{0.0};
    double lower_over_log{0.0};
    double predicted{0.0};
};

struct ExperimentTable {
    std::vector<ExperimentRow> rows;
    bool upper_trend_decreasing{false};
    double extrapolated_upper{0.0};  // linear extrapolation in 1/|log eps|
    std::string to_csv() const;
};

ExperimentTable gamma_convergence_experiment(const RecoveryPlan& plan,
                                             const std::vector<double>& epsilon_ladder,
                                             const Rect& domain, double step_factor = 4.0,
                                             int threads = 0);

}  // namespace vortexscale
