#include "vortexscale/mollifier.hpp"

#include <cmath>
#include <stdexcept>

namespace vortexscale {

namespace {

double raw_bump(double t) {
    if (t >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

double raw_bump_derivative(double t) {
    if (t >= 1.0 || t <= 0.0) return 0.0;
    const double s = 1.0 - t * t;
    return raw_bump(t) * (-2.0 * t / (s * s));
}

// Adaptive Simpson on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

Mollifier::Mollifier() {
    // Unit mass over the plane: 2*pi * int_0^1 c * bump(t) * t dt = 1.
    const double radial_mass =
        integrate([](double t) { return raw_bump(t) * t; }, 0.0, 1.0, 1e-14);
    normalization_ = 1.0 / (2.0 * kPi * radial_mass);
    grad_l1_ = normalization_ * 2.0 * kPi *
               integrate([](double t) { return std::abs(raw_bump_derivative(t)) * t; }, 0.0, 1.0,
                         1e-14);
}

double Mollifier::profile(double t) const { return normalization_ * raw_bump(std::abs(t)); }

double Mollifier::profile_derivative(double t) const {
    return normalization_ * raw_bump_derivative(std::abs(t));
}

double Mollifier::value_scaled(Point v, double eta) const {
    return profile(norm(v) / eta) / (eta * eta);
}

MollifiedMeasure::MollifiedMeasure(AtomicMeasure base, double eta, const Mollifier& rho)
    : base_(std::move(base)), eta_(eta), rho_(rho) {
    if (!(eta > 0.0)) throw std::invalid_argument("mollify: scale eta must be positive");
}

double MollifiedMeasure::density(Point p) const {
    double sum = 0.0;
    const double eta2 = eta_ * eta_;
    for (const auto& atom : base_.atoms()) {
        const double d2 = norm2(p - atom.position);
        if (d2 >= eta2) continue;
        sum += atom.weight * rho_.profile(std::sqrt(d2) / eta_) / eta2;
    }
    return sum;
}

MollifiedMeasure mollify(const AtomicMeasure& mu, double eta, const Mollifier& rho) {
    return MollifiedMeasure(mu, eta, rho);
}

namespace {

template <typename Transform>
double quadrature_on_region(const MollifiedMeasure& nu, const Rect& region, double resolution,
                            Transform&& transform) {
    if (!(resolution > 0.0)) throw std::invalid_argument("quadrature: resolution must be positive");
    if (resolution > nu.scale() / 8.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "quadrature: resolution too coarse for the mollifier scale (must be <= eta/8)");
    }
    const int nx = std::max(1, static_cast<int>(std::ceil(region.width / resolution)));
    const int ny = std::max(1, static_cast<int>(std::ceil(region.height / resolution)));
    const double hx = region.width / nx;
    const double hy = region.height / ny;
    // Row sums combined by a fixed pairwise tree for reproducibility.
    std::vector<double> rows(static_cast<std::size_t>(ny), 0.0);
    for (int j = 0; j < ny; ++j) {
        const double y = region.y0 + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double x = region.x0 + (i + 0.5) * hx;
            row += transform(nu.density({x, y}));
        }
        rows[static_cast<std::size_t>(j)] = row * hx * hy;
    }
    while (rows.size() > 1) {
        std::vector<double> next;
        next.reserve((rows.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < rows.size(); i += 2) next.push_back(rows[i] + rows[i + 1]);
        if (rows.size() % 2 == 1) next.push_back(rows.back());
        rows = std::move(next);
    }
    return rows.empty() ? 0.0 : rows[0];
}

}  // namespace

double tv_on_region(const MollifiedMeasure& nu, const Rect& region, double resolution) {
    return quadrature_on_region(nu, region, resolution, [](double v) { return std::abs(v); });
}

double integral_on_region(const MollifiedMeasure& nu, const Rect& region, double resolution) {
    return quadrature_on_region(nu, region, resolution, [](double v) { return v; });
}

double tv_of_mollified(const MollifiedMeasure& nu, const Rect& domain, double resolution) {
    const auto& atoms = nu.base().atoms();
    if (atoms.empty()) return 0.0;
    const double eta = nu.scale();
    // Cluster atoms whose mollified bumps can overlap.
    std::vector<int> cluster(atoms.size(), -1);
    int n_clusters = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (cluster[i] >= 0) continue;
        cluster[i] = n_clusters++;
        std::vector<std::size_t> frontier{i};
        while (!frontier.empty()) {
            const std::size_t cur = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                if (cluster[j] >= 0) continue;
                if (distance(atoms[cur].position, atoms[j].position) < 2.0 * eta + resolution) {
                    cluster[j] = cluster[i];
                    frontier.push_back(j);
                }
            }
        }
    }
    double total = 0.0;
    for (int c = 0; c < n_clusters; ++c) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (cluster[i] != c) continue;
            xmin = std::min(xmin, atoms[i].position.x - eta);
            xmax = std::max(xmax, atoms[i].position.x + eta);
            ymin = std::min(ymin, atoms[i].position.y - eta);
            ymax = std::max(ymax, atoms[i].position.y + eta);
        }
        xmin = std::max(xmin, domain.x0);
        ymin = std::max(ymin, domain.y0);
        xmax = std::min(xmax, domain.x1());
        ymax = std::min(ymax, domain.y1());
        if (xmax <= xmin || ymax <= ymin) continue;
        total += tv_on_region(nu, Rect{xmin, ymin, xmax - xmin, ymax - ymin}, resolution);
    }
    return total;
}

double mollified_function_value(const std::function<double(Point)>& phi, Point p, double eta,
                                const Mollifier& rho, int samples_per_axis) {
    // (phi * rho_eta)(p) = int phi(p - y) rho_eta(y) dy over |y| < eta.
    const int n = samples_per_axis;
    const double h = 2.0 * eta / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = -eta + (j + 0.5) * h;
        for (int i = 0; i < n; ++i) {
            const double x = -eta + (i + 0.5) * h;
            const double w = rho.value_scaled({x, y}, eta);
            if (w == 0.0) continue;
            sum += phi({p.x - x, p.y - y}) * w;
        }
    }
    return sum * h * h;
}

}  // namespace vortexscale
