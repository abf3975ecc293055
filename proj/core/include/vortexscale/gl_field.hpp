#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/core_radius.hpp"
#include "vortexscale/geometry.hpp"
#include "vortexscale/mollifier.hpp"

namespace vortexscale {

/// Discrete planar vector field on a rectangular node grid with spacing h
/// over the domain, carrying the model length scale eps. The grid must
/// resolve the core profile: h <= eps/4.
class GLField {
public:
    GLField(int nx, int ny, double h, Point origin, double epsilon);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    Point origin() const { return origin_; }
    double epsilon() const { return epsilon_; }
    Rect domain() const { return Rect{origin_.x, origin_.y, (nx_ - 1) * h_, (ny_ - 1) * h_}; }

    Point node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
    Vec2 value(int i, int j) const {
        const std::size_t base = 2 * (static_cast<std::size_t>(j) * nx_ + i);
        return {vals_[base], vals_[base + 1]};
    }
    void set_value(int i, int j, Vec2 v) {
        const std::size_t base = 2 * (static_cast<std::size_t>(j) * nx_ + i);
        vals_[base] = v.x;
        vals_[base + 1] = v.y;
    }
    double modulus(int i, int j) const {
        const Vec2 v = value(i, j);
        return std::hypot(v.x, v.y);
    }
    Vec2 sample(Point p) const;  // bilinear

    /// Binary layout: int64 nx, ny; doubles h, x0, y0, epsilon; row-major
    /// pairs of 64-bit reals. A JSON sidecar <path>.json carries the header.
    void save(const std::string& path) const;
    static GLField load(const std::string& path);

private:
    int nx_, ny_;
    double h_;
    Point origin_;
    double epsilon_;
    std::vector<double> vals_;
};

/// Potential of the modulus; the default (1-t^2)^2/4 vanishes exactly at 1,
/// is quadratic near 1 and bounded away from zero at infinity.
struct Potential {
    std::function<double(double)> w;
    double operator()(double t) const { return w(t); }
    static Potential standard();
};

/// Central-difference gradient on interior nodes, one-sided at the boundary;
/// midpoint quadrature of (1/2)|grad u|^2 + W(|u|)/eps^2.
double gl_energy(const GLField& u, const Potential& W);
/// Per-node energy density (same quadrature weights as gl_energy).
std::vector<double> gl_energy_density(const GLField& u, const Potential& W);

/// Cell-centered Jacobian det(grad u) via corner differences.
struct JacobianField {
    int nx{0}, ny{0};  // cells
    double h{0.0};
    Point origin;      // corner of cell (0,0)
    std::vector<double> det;

    double at(int i, int j) const { return det[static_cast<std::size_t>(j) * nx + i]; }
    Point cell_center(int i, int j) const {
        return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
    }
    double integral() const;
    double integral_over(const Ball& ball) const;
    double total_variation() const;
};

JacobianField jacobian(const GLField& u);

/// Distributional pairing in divergence form with discrete derivatives of
/// the test function.
double jacobian_pairing(const GLField& u, const std::function<double(Point)>& psi);

struct DegreeResult {
    int degree{0};
    double residual{0.0};
};

/// Winding of u/|u| along the circle, 256-point trapezoid rule. The modulus
/// must stay at least 0.1 on the loop.
DegreeResult degree(const GLField& u, Point center, double radius, int samples = 256);

/// Jacobian of the modulus-truncated field min(|u|/tau, 1) * u/|u|.
JacobianField modified_jacobian(const GLField& u, double tau);

/// Mollified Jacobian: convolution of the cell Jacobian with the mollifier
/// at scale eps^s. Requires eps^s >= 4h.
class MollifiedJacobian {
public:
    MollifiedJacobian(JacobianField conv, double eta);
    double density(Point p) const;  // bilinear over the convolved cells
    double tv_on_region(const Rect& region) const;
    double total_variation() const;
    const JacobianField& field() const { return conv_; }
    double scale() const { return eta_; }

private:
    JacobianField conv_;
    double eta_;
};

MollifiedJacobian mollified_jacobian(const GLField& u, double s, const Mollifier& rho);

struct SublevelCovering {
    double tau{0.0};
    std::vector<std::pair<int, int>> marked_cells;
    std::vector<Ball> balls;
    double perimeter_estimate{0.0};
};

/// Marks cells whose minimal nodal modulus is at most tau, estimates the
/// discrete interface length, and wraps the marked components in disjoint
/// balls (smallest enclosing ball per component, cascade-merged, one ball
/// enlarged by eps).
SublevelCovering sublevel_covering(const GLField& u, double tau);

/// Recovery field of a plan: modulus is the product of radial ramps
/// min(r/eps, 1) over all singular points, phase the superposition phase,
/// composed multiplicatively per node (no branch cuts).
GLField synthetic_field(const RecoveryPlan& plan, double epsilon, const Rect& domain, double h);

/// Compactly supported smooth test function with sup + Lip <= 1.
struct TestFunction {
    std::function<double(Point)> f;
};

std::vector<TestFunction> random_test_functions(const Rect& domain, int count,
                                                unsigned long long seed);

struct TruncationGapReport {
    double tau{0.0};
    double lower{0.0};   // dictionary pairing lower bound on the flat distance
    double upper{0.0};   // ball-localized atomic-projection upper bound
    double budget{0.0};  // C * eps * |log eps|
    bool within_budget{false};
    bool energy_bound_ok{true};  // GL energy within the logarithmic regime
};

/// Flat-distance bracket between Ju and J_tau u for each tau, reported
/// against C * eps * |log eps|.
std::vector<TruncationGapReport> jacobian_truncation_gap(const GLField& u,
                                                         const std::vector<double>& taus,
                                                         double calibration_constant);

}  // namespace vortexscale
