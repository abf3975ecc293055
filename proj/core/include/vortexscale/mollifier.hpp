#pragma once

#include <functional>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/geometry.hpp"

namespace vortexscale {

/// Radially symmetric smooth bump supported in the unit ball, normalized to
/// unit mass over the plane. Profile c * exp(-1/(1-t^2)) for t in [0,1).
class Mollifier {
public:
    Mollifier();

    /// Normalized radial profile at t = |x| in [0, inf).
    double profile(double t) const;
    double profile_derivative(double t) const;

    /// rho_eta(v) = profile(|v|/eta) / eta^2
    double value_scaled(Point v, double eta) const;

    /// L1 norm of the gradient of the unscaled profile; for the scaled
    /// mollifier this becomes grad_l1()/eta.
    double grad_l1() const { return grad_l1_; }
    double normalization() const { return normalization_; }

private:
    double normalization_{0.0};
    double grad_l1_{0.0};
};

/// Lazily evaluable density of mu * rho_eta. No grid is committed.
class MollifiedMeasure {
public:
    MollifiedMeasure(AtomicMeasure base, double eta, const Mollifier& rho);

    double density(Point p) const;
    double scale() const { return eta_; }
    const AtomicMeasure& base() const { return base_; }
    const Mollifier& mollifier() const { return rho_; }

private:
    AtomicMeasure base_;
    double eta_;
    Mollifier rho_;
};

MollifiedMeasure mollify(const AtomicMeasure& mu, double eta, const Mollifier& rho);

/// Midpoint-rule quadrature of |density| over the rectangle. The resolution
/// must resolve the mollifier bumps: resolution <= eta/8 is enforced.
double tv_on_region(const MollifiedMeasure& nu, const Rect& region, double resolution);

/// Quadrature of the signed density over the rectangle (mass conservation
/// checks).
double integral_on_region(const MollifiedMeasure& nu, const Rect& region, double resolution);

/// Total variation over the domain, quadratured only over the support
/// (clusters of overlapping mollified bumps); identical to tv_on_region of
/// the whole domain but affordable at small scales.
double tv_of_mollified(const MollifiedMeasure& nu, const Rect& domain, double resolution);

/// (phi * rho_eta)(p) by quadrature over the mollifier support.
double mollified_function_value(const std::function<double(Point)>& phi, Point p, double eta,
                                const Mollifier& rho, int samples_per_axis = 64);

}  // namespace vortexscale
