#pragma once

#include <string>
#include <vector>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/ball_construction.hpp"
#include "vortexscale/geometry.hpp"
#include "vortexscale/mollifier.hpp"

namespace vortexscale {

/// Probe of the construction at mesoscale eps^s: the probe time is
/// t = eps^(s-1) - 1, at which balls grown from radius eps have radius eps^s.
struct ScaleProbe {
    double epsilon{0.0};
    double s{0.0};
    double time() const { return std::pow(epsilon, s - 1.0) - 1.0; }
};

/// Piecewise-constant family of cluster densities over scale exponents:
/// jump set S = {0 = s_0 < s_1 < ...}, one positive measure nu per plateau
/// [s_k, s_{k+1}), the signed limit vorticity, and the defect measures with
/// nu = |mu_limit| + 2 xi_def plateau by plateau.
struct ScaleSpectrum {
    std::vector<double> jumps;            // includes the leading 0
    std::vector<AtomicMeasure> nu;        // one per plateau, jumps.size() entries
    std::vector<AtomicMeasure> xi_def;    // same indexing as nu
    AtomicMeasure mu_limit;

    std::string to_json_string() const;
};

/// Effective vorticity at scale eps^s: one atom per domain-contained ball at
/// the probe time, weighted by the ball charge, zero weights dropped.
AtomicMeasure coarse_vorticity(const WeightedBalls& w, const Rect& domain, double epsilon,
                               double s);

/// Sweeps the scale exponent over a grid, locates the jump exponents of the
/// aggregate charge structure, and assembles the spectrum from the plateaus.
/// mu must be integer-weighted with atoms separated by more than 2*eps.
ScaleSpectrum detect_spectrum(const AtomicMeasure& mu, double epsilon, const Rect& domain,
                              double s_grid = 1.0 / 64.0);

/// pi * sum_k (s_{k+1} - s_k) * nu_k(domain), telescope closed at s = 1.
double gamma_limit_energy(const ScaleSpectrum& spectrum);

/// Algebraically equal form pi*|mu| + pi * sum (1 - s_k) * eta_k with
/// eta_k the jump of nu at s_k (eta_0 = nu_0 - |mu|).
double gamma_limit_energy_by_defects(const ScaleSpectrum& spectrum);

struct ConsistencyReport {
    double tv_mollified{0.0};
    double nu_total{0.0};
    double tv_discrepancy{0.0};
    double flat_bound{0.0};
};

/// Compares the total variation of mu mollified at scale eps^s against the
/// plateau density total, and bounds the flat distance between the mollified
/// measure and the coarse atoms.
ConsistencyReport mollified_consistency_check(const AtomicMeasure& mu, double epsilon, double s,
                                              const Rect& domain, const Mollifier& rho);

}  // namespace vortexscale
