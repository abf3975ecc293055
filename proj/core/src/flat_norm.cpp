#include "vortexscale/flat_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vortexscale {

namespace {

// Dense primal simplex for: maximize c.x subject to A x <= b, x >= 0,
// with b >= 0 so the slack basis is feasible. Bland's rule, so the
// iteration terminates without cycling. Problems here are tiny
// (a few hundred rows), a tableau is plenty.
class Simplex {
public:
    Simplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
        : m_(a.size()), n_(c.size()) {
        cols_ = n_ + m_ + 1;
        tab_.assign((m_ + 1) * cols_, 0.0);
        basis_.resize(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            if (b[r] < 0.0) throw std::logic_error("simplex: negative rhs");
            for (std::size_t j = 0; j < n_; ++j) at(r, j) = a[r][j];
            at(r, n_ + r) = 1.0;
            at(r, cols_ - 1) = b[r];
            basis_[r] = n_ + r;
        }
        for (std::size_t j = 0; j < n_; ++j) at(m_, j) = -c[j];
    }

    double solve() {
        const std::size_t max_iters = 50000;
        for (std::size_t iter = 0; iter < max_iters; ++iter) {
            // Entering: smallest index with negative objective row entry.
            std::size_t pivot_col = cols_;
            for (std::size_t j = 0; j + 1 < cols_; ++j) {
                if (at(m_, j) < -1e-11) {
                    pivot_col = j;
                    break;
                }
            }
            if (pivot_col == cols_) return at(m_, cols_ - 1);
            // Leaving: min ratio, ties by smallest basis index (Bland).
            std::size_t pivot_row = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double a_rj = at(r, pivot_col);
                if (a_rj > 1e-11) {
                    const double ratio = at(r, cols_ - 1) / a_rj;
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 &&
                         (pivot_row == m_ || basis_[r] < basis_[pivot_row]))) {
                        best_ratio = ratio;
                        pivot_row = r;
                    }
                }
            }
            if (pivot_row == m_) throw std::runtime_error("simplex: unbounded program");
            pivot(pivot_row, pivot_col);
        }
        throw std::runtime_error("simplex: iteration limit reached");
    }

    std::vector<double> primal_solution() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < n_) x[basis_[r]] = at(r, cols_ - 1);
        }
        return x;
    }

private:
    double& at(std::size_t r, std::size_t j) { return tab_[r * cols_ + j]; }
    double at(std::size_t r, std::size_t j) const { return tab_[r * cols_ + j]; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double piv = at(pr, pc);
        for (std::size_t j = 0; j < cols_; ++j) at(pr, j) /= piv;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double factor = at(r, pc);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) at(r, j) -= factor * at(pr, j);
        }
        basis_[pr] = pc;
    }

    std::size_t m_, n_, cols_;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
};

struct FlatNormLP {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> c;
    std::size_t n_atoms;
};

// Variables: psi_i = p_i - q_i (2N nonnegative), then L.
// Constraints (all with rhs >= 0, feasible at the origin):
//   psi_i - psi_j - L*|x_i - x_j| <= 0   (both orderings)
//   +-psi_i - L*dist(x_i, boundary) <= 0
//   +-psi_i + L <= 1
//   L <= 1
FlatNormLP build_lp(const AtomicMeasure& mu, const Rect& domain) {
    const auto& atoms = mu.atoms();
    const std::size_t n = atoms.size();
    for (const auto& atom : atoms) {
        if (!domain.strictly_inside(atom.position)) {
            throw std::invalid_argument("flat_norm: atom on or outside the domain boundary");
        }
    }
    FlatNormLP lp;
    lp.n_atoms = n;
    const std::size_t nv = 2 * n + 1;
    const std::size_t l_col = 2 * n;
    auto add_row = [&lp, nv](double rhs) -> std::vector<double>& {
        lp.a.emplace_back(nv, 0.0);
        lp.b.push_back(rhs);
        return lp.a.back();
    };
    auto set_psi = [n](std::vector<double>& row, std::size_t i, double coeff) {
        row[i] += coeff;
        row[n + i] -= coeff;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(atoms[i].position, atoms[j].position);
            auto& fwd = add_row(0.0);
            set_psi(fwd, i, 1.0);
            set_psi(fwd, j, -1.0);
            fwd[l_col] = -d;
            auto& bwd = add_row(0.0);
            set_psi(bwd, i, -1.0);
            set_psi(bwd, j, 1.0);
            bwd[l_col] = -d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double bd = domain.boundary_distance(atoms[i].position);
        for (double sign : {1.0, -1.0}) {
            auto& support = add_row(0.0);
            set_psi(support, i, sign);
            support[l_col] = -bd;
            auto& cap = add_row(1.0);
            set_psi(cap, i, sign);
            cap[l_col] = 1.0;
        }
    }
    auto& l_bound = add_row(1.0);
    l_bound[l_col] = 1.0;

    lp.c.assign(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lp.c[i] = atoms[i].weight;
        lp.c[n + i] = -atoms[i].weight;
    }
    return lp;
}

}  // namespace

double flat_norm(const AtomicMeasure& mu, const Rect& domain) {
    if (mu.empty()) return 0.0;
    FlatNormLP lp = build_lp(mu, domain);
    Simplex solver(std::move(lp.a), std::move(lp.b), std::move(lp.c));
    return solver.solve();
}

FlatNormSolution flat_norm_certified(const AtomicMeasure& mu, const Rect& domain) {
    FlatNormSolution sol;
    if (mu.empty()) {
        sol.certificate_valid = true;
        return sol;
    }
    FlatNormLP lp = build_lp(mu, domain);
    const std::size_t n = lp.n_atoms;
    Simplex solver(std::move(lp.a), std::move(lp.b), std::move(lp.c));
    sol.value = solver.solve();
    const auto x = solver.primal_solution();
    sol.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.psi[i] = x[i] - x[n + i];
    sol.lipschitz = x[2 * n];

    // McShane upper envelope clipped to the admissible corridor. Checking it
    // interpolates the atom values and stays admissible on a sample grid
    // certifies that the LP constraints describe a genuine test function.
    const auto& atoms = mu.atoms();
    const double big_l = sol.lipschitz;
    auto corridor = [&](Point p) {
        return std::min(big_l * domain.boundary_distance(p), 1.0 - big_l);
    };
    auto extension = [&](Point p) {
        double env = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            env = std::min(env, sol.psi[i] + big_l * distance(p, atoms[i].position));
        }
        const double m = corridor(p);
        return std::max(std::min(env, m), -m);
    };
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(extension(atoms[i].position) - sol.psi[i]));
    }
    const int grid = 24;
    std::vector<std::pair<Point, double>> samples;
    for (int j = 0; j <= grid; ++j) {
        for (int i = 0; i <= grid; ++i) {
            const Point p{domain.x0 + domain.width * i / grid,
                          domain.y0 + domain.height * j / grid};
            samples.emplace_back(p, extension(p));
        }
    }
    for (const auto& [p, v] : samples) {
        const double m = corridor(p);
        err = std::max(err, std::abs(v) - std::max(m, 0.0));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double d = distance(samples[i].first, samples[j].first);
            if (d <= 0.0) continue;
            err = std::max(err,
                           std::abs(samples[i].second - samples[j].second) - big_l * d);
        }
    }
    sol.certificate_error = std::max(err, 0.0);
    sol.certificate_valid = sol.certificate_error <= 1e-7;
    return sol;
}

BallLocalizationReport flat_distance_bound_check(const AtomicMeasure& alpha,
                                                 const AtomicMeasure& beta,
                                                 const std::vector<Ball>& balls,
                                                 const Rect& domain) {
    BallLocalizationReport report;
    std::vector<Ball> contained;
    for (const auto& b : balls) {
        if (domain.contains_ball(b)) contained.push_back(b);
    }
    auto in_union = [](const std::vector<Ball>& family, Point p) {
        for (const auto& b : family) {
            if (b.contains_point(p)) return true;
        }
        return false;
    };
    std::ostringstream diag;
    report.assumptions_hold = true;
    for (const auto& atom : alpha.atoms()) {
        if (!in_union(contained, atom.position)) {
            report.assumptions_hold = false;
            diag << "alpha atom at (" << atom.position.x << ", " << atom.position.y
                 << ") outside the domain-contained balls; ";
        }
    }
    for (const auto& atom : beta.atoms()) {
        if (!in_union(balls, atom.position)) {
            report.assumptions_hold = false;
            diag << "beta atom at (" << atom.position.x << ", " << atom.position.y
                 << ") outside the balls; ";
        }
    }
    for (std::size_t k = 0; k < contained.size(); ++k) {
        const double da = alpha.weight_in(contained[k]);
        const double db = beta.weight_in(contained[k]);
        if (std::abs(da - db) > 1e-9) {
            report.assumptions_hold = false;
            diag << "contained ball " << k << " centered (" << contained[k].center.x << ", "
                 << contained[k].center.y << "): alpha(B)=" << da << " != beta(B)=" << db << "; ";
        }
    }
    if (!report.assumptions_hold) {
        report.diagnostic = diag.str();
        return report;
    }
    double rad = 0.0;
    for (const auto& b : balls) rad += b.radius;
    report.lhs = flat_norm(alpha - beta, domain);
    report.rhs = 2.0 * rad * (alpha.total_variation() + beta.total_variation());
    report.pass = report.lhs <= report.rhs + 1e-9;
    return report;
}

}  // namespace vortexscale
