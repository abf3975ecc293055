#include "vortexscale/core_radius.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vortexscale {

AdmissibilityReport check_admissible(const AtomicMeasure& mu, double epsilon, const Rect& domain) {
    AdmissibilityReport report;
    if (!(epsilon > 0.0)) {
        report.violations.push_back("epsilon must be positive");
        return report;
    }
    if (!mu.integer_weighted()) {
        report.violations.push_back("weights must be integers");
    }
    const auto& atoms = mu.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double bd = domain.boundary_distance(atoms[i].position);
        if (!domain.strictly_inside(atoms[i].position) || bd < 2.0 * epsilon) {
            std::ostringstream msg;
            msg << "atom " << i << " at (" << atoms[i].position.x << ", " << atoms[i].position.y
                << ") has boundary distance " << bd << " < 2*eps = " << 2.0 * epsilon;
            report.violations.push_back(msg.str());
        }
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            const double d = distance(atoms[i].position, atoms[j].position);
            if (d < 4.0 * epsilon) {
                std::ostringstream msg;
                msg << "atoms " << i << " and " << j << " at distance " << d
                    << " < 4*eps = " << 4.0 * epsilon;
                report.violations.push_back(msg.str());
            }
        }
    }
    report.admissible = report.violations.empty();
    return report;
}

Vec2 PhaseField::gradient(Point p) const {
    double gx = 0.0, gy = 0.0;
    for (const auto& atom : mu_.atoms()) {
        const double dx = p.x - atom.position.x;
        const double dy = p.y - atom.position.y;
        const double inv = atom.weight / (dx * dx + dy * dy);
        gx -= dy * inv;
        gy += dx * inv;
    }
    return {gx, gy};
}

double PhaseField::circulation(Point center, double radius, int samples) const {
    double sum = 0.0;
    const double dtheta = 2.0 * kPi / samples;
    for (int k = 0; k < samples; ++k) {
        const double theta = (k + 0.5) * dtheta;
        const Point p{center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
        const Vec2 g = gradient(p);
        const double tx = -std::sin(theta), ty = std::cos(theta);
        sum += (g.x * tx + g.y * ty) * radius * dtheta;
    }
    return sum;
}

namespace {

struct QuadratureAtoms {
    std::vector<double> x, y, w;
};

// One quadrature row: pure segments run a tight loop, cells near a core are
// classified (inside skipped, boundary subdivided to depth 4).
double quadrature_row(const QuadratureAtoms& atoms, double epsilon, double x_origin, double y,
                      double h, int nx) {
    const std::size_t n = atoms.x.size();
    const double half_diag = h * std::sqrt(0.5);
    const double outer = epsilon + half_diag;
    const double inner = std::max(epsilon - half_diag, 0.0);

    std::vector<double> dy2(n), numer_x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double dy = y - atoms.y[k];
        dy2[k] = dy * dy;
        numer_x[k] = -atoms.w[k] * dy;
    }

    // Cell index ranges where a core can interfere with the cell.
    std::vector<std::pair<int, int>> special;
    for (std::size_t k = 0; k < n; ++k) {
        if (dy2[k] > outer * outer) continue;
        const double dx_max = std::sqrt(outer * outer - dy2[k]);
        int lo = static_cast<int>(std::floor((atoms.x[k] - dx_max - x_origin) / h - 0.5));
        int hi = static_cast<int>(std::ceil((atoms.x[k] + dx_max - x_origin) / h - 0.5));
        lo = std::max(lo, 0);
        hi = std::min(hi, nx - 1);
        if (lo <= hi) special.emplace_back(lo, hi);
    }
    std::sort(special.begin(), special.end());
    std::vector<std::pair<int, int>> ranges;
    for (const auto& r : special) {
        if (!ranges.empty() && r.first <= ranges.back().second + 1) {
            ranges.back().second = std::max(ranges.back().second, r.second);
        } else {
            ranges.push_back(r);
        }
    }

    auto density_at = [&](double px, double py) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dx = px - atoms.x[k];
            const double dyk = py - atoms.y[k];
            const double inv = 1.0 / (dx * dx + dyk * dyk);
            gx += -atoms.w[k] * dyk * inv;
            gy += atoms.w[k] * dx * inv;
        }
        return 0.5 * (gx * gx + gy * gy);
    };

    double acc = 0.0;
    auto run_pure = [&](int from, int to) {
        double seg = 0.0;
        for (int i = from; i < to; ++i) {
            const double x = x_origin + (i + 0.5) * h;
            double gx = 0.0, gy = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double dx = x - atoms.x[k];
                const double inv = 1.0 / (dx * dx + dy2[k]);
                gx += numer_x[k] * inv;
                gy += atoms.w[k] * dx * inv;
            }
            seg += gx * gx + gy * gy;
        }
        acc += 0.5 * seg * h * h;
    };

    int cursor = 0;
    for (const auto& [lo, hi] : ranges) {
        if (cursor < lo) run_pure(cursor, lo);
        for (int i = lo; i <= hi; ++i) {
            const double x = x_origin + (i + 0.5) * h;
            double min_d2 = 1e300;
            for (std::size_t k = 0; k < n; ++k) {
                const double dx = x - atoms.x[k];
                min_d2 = std::min(min_d2, dx * dx + dy2[k]);
            }
            if (min_d2 <= inner * inner) continue;  // cell swallowed by a disk
            if (min_d2 > outer * outer) {
                run_pure(i, i + 1);
                continue;
            }
            // Boundary cell: 2x2 split to depth 4, midpoints outside the
            // disks only.
            constexpr int kSplit = 16;
            const double hs = h / kSplit;
            double cell = 0.0;
            const double eps2 = epsilon * epsilon;
            for (int sj = 0; sj < kSplit; ++sj) {
                const double py = y - h / 2.0 + (sj + 0.5) * hs;
                for (int si = 0; si < kSplit; ++si) {
                    const double px = x - h / 2.0 + (si + 0.5) * hs;
                    double d2 = 1e300;
                    for (std::size_t k = 0; k < n; ++k) {
                        const double ddx = px - atoms.x[k];
                        const double ddy = py - atoms.y[k];
                        d2 = std::min(d2, ddx * ddx + ddy * ddy);
                    }
                    if (d2 > eps2) cell += density_at(px, py);
                }
            }
            acc += cell * hs * hs;
        }
        cursor = hi + 1;
    }
    if (cursor < nx) run_pure(cursor, nx);
    return acc;
}

double pairwise_reduce(std::vector<double> values) {
    if (values.empty()) return 0.0;
    while (values.size() > 1) {
        std::vector<double> next;
        next.reserve((values.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
            next.push_back(values[i] + values[i + 1]);
        }
        if (values.size() % 2 == 1) next.push_back(values.back());
        values = std::move(next);
    }
    return values[0];
}

double quadrature_energy(const VortexConfig& cfg, const Rect& domain, double grid_step,
                         int threads) {
    const int nx = std::max(1, static_cast<int>(std::ceil(domain.width / grid_step)));
    const int ny = std::max(1, static_cast<int>(std::ceil(domain.height / grid_step)));
    const double hx = domain.width / nx;
    const double hy = domain.height / ny;
    // Tiling must stay square for the per-cell geometry; widths and heights
    // here always come from square-ish domains, enforce closeness.
    const double h = hx;
    if (std::abs(hx - hy) > 1e-9 * h) {
        throw std::invalid_argument("energy_upper: domain aspect must tile with square cells");
    }
    QuadratureAtoms atoms;
    for (const auto& a : cfg.mu.atoms()) {
        atoms.x.push_back(a.position.x);
        atoms.y.push_back(a.position.y);
        atoms.w.push_back(a.weight);
    }
    std::vector<double> rows(static_cast<std::size_t>(ny), 0.0);
    const int n_threads = threads > 0 ? threads : static_cast<int>(std::max(
                                            1u, std::thread::hardware_concurrency()));
    if (n_threads <= 1) {
        for (int j = 0; j < ny; ++j) {
            rows[static_cast<std::size_t>(j)] = quadrature_row(
                atoms, cfg.epsilon, domain.x0, domain.y0 + (j + 0.5) * h, h, nx);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next_row{0};
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&]() {
                while (true) {
                    const int j = next_row.fetch_add(1);
                    if (j >= ny) return;
                    rows[static_cast<std::size_t>(j)] = quadrature_row(
                        atoms, cfg.epsilon, domain.x0, domain.y0 + (j + 0.5) * h, h, nx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return pairwise_reduce(std::move(rows));
}

}  // namespace

EnergyEstimate energy_upper(const VortexConfig& cfg, const Rect& domain, double grid_step,
                            int threads) {
    if (cfg.mu.empty()) return {0.0, 0.0};
    const AdmissibilityReport adm = check_admissible(cfg.mu, cfg.epsilon, domain);
    if (!adm.admissible) {
        throw std::invalid_argument("energy_upper: configuration not admissible: " +
                                    adm.violations.front());
    }
    if (grid_step > cfg.epsilon / 4.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("energy_upper: grid step must be at most eps/4");
    }
    EnergyEstimate est;
    est.value = quadrature_energy(cfg, domain, grid_step, threads);
    const double coarse = quadrature_energy(cfg, domain, 2.0 * grid_step, threads);
    est.refinement_error = std::abs(est.value - coarse);
    return est;
}

double energy_lower(const VortexConfig& cfg, const Rect& domain) {
    if (cfg.mu.empty()) return 0.0;
    std::vector<Ball> initial;
    for (const auto& atom : cfg.mu.atoms()) initial.push_back(Ball{atom.position, cfg.epsilon});
    const double t_stop = domain.diameter() / cfg.epsilon - 1.0;
    WeightedBalls w = run_construction(std::move(initial), cfg.mu, t_stop);
    std::vector<double> partition = dyadic_partition(t_stop);
    const std::vector<double> exits = containment_exit_times(w.trajectory(), domain, t_stop);
    partition.insert(partition.end(), exits.begin(), exits.end());
    return lower_bound_F(w, domain, t_stop, std::move(partition));
}

VortexConfig build_recovery(const RecoveryPlan& plan, double epsilon, const Rect& domain) {
    if (!(epsilon > 0.0) || epsilon >= 1.0) {
        throw std::invalid_argument("build_recovery: epsilon must lie in (0, 1)");
    }
    for (const auto& atom : plan.mu.atoms()) {
        if (std::abs(std::abs(atom.weight) - 1.0) > 1e-9) {
            throw std::invalid_argument("build_recovery: plan vortices must have unit weights");
        }
    }
    auto assemble = [&plan, &domain](double eps) {
        std::vector<WeightedAtom> atoms = plan.mu.atoms();
        for (const auto& cluster : plan.clusters) {
            if (cluster.multiplicity <= 0 || cluster.multiplicity % 2 != 0) {
                throw std::invalid_argument(
                    "build_recovery: cluster multiplicity must be a positive even integer");
            }
            if (cluster.exponent < 0.0 || cluster.exponent >= 1.0) {
                throw std::invalid_argument("build_recovery: cluster exponent must be in [0, 1)");
            }
            const double separation = cluster.exponent == 0.0
                                          ? 2.0 / std::abs(std::log(eps))
                                          : 2.0 * std::pow(eps, cluster.exponent);
            const int pairs = cluster.multiplicity / 2;
            for (int p = 0; p < pairs; ++p) {
                // Dipole axis horizontal; extra pairs stack vertically.
                const double y_off = (pairs == 1) ? 0.0 : (p - (pairs - 1) / 2.0) * 4.0 * separation;
                const Point base{cluster.location.x, cluster.location.y + y_off};
                atoms.push_back(WeightedAtom{{base.x + separation / 2.0, base.y}, 1.0});
                atoms.push_back(WeightedAtom{{base.x - separation / 2.0, base.y}, -1.0});
            }
        }
        (void)domain;
        return AtomicMeasure(std::move(atoms));
    };
    const AtomicMeasure mu_eps = assemble(epsilon);
    const AdmissibilityReport adm = check_admissible(mu_eps, epsilon, domain);
    if (!adm.admissible) {
        double feasible = epsilon;
        for (int halvings = 0; halvings < 60; ++halvings) {
            feasible /= 2.0;
            if (check_admissible(assemble(feasible), feasible, domain).admissible) break;
        }
        throw std::invalid_argument(
            "build_recovery: epsilon too large for admissibility (" + adm.violations.front() +
            "); minimal feasible epsilon <= " + std::to_string(feasible));
    }
    return VortexConfig{mu_eps, epsilon};
}

ScaleSpectrum plan_spectrum(const RecoveryPlan& plan) {
    ScaleSpectrum spectrum;
    std::vector<double> exponents;
    for (const auto& cluster : plan.clusters) {
        if (cluster.exponent > 0.0) exponents.push_back(cluster.exponent);
    }
    std::sort(exponents.begin(), exponents.end());
    exponents.erase(std::unique(exponents.begin(), exponents.end()), exponents.end());
    spectrum.jumps = {0.0};
    spectrum.jumps.insert(spectrum.jumps.end(), exponents.begin(), exponents.end());
    spectrum.mu_limit = plan.mu;
    for (double s : spectrum.jumps) {
        std::vector<WeightedAtom> nu_atoms = plan.mu.absolute().atoms();
        std::vector<WeightedAtom> xi_atoms;
        for (const auto& cluster : plan.clusters) {
            if (cluster.exponent <= s) {
                nu_atoms.push_back(
                    WeightedAtom{cluster.location, static_cast<double>(cluster.multiplicity)});
                xi_atoms.push_back(
                    WeightedAtom{cluster.location, cluster.multiplicity / 2.0});
            }
        }
        spectrum.nu.emplace_back(std::move(nu_atoms));
        spectrum.xi_def.emplace_back(std::move(xi_atoms));
    }
    return spectrum;
}

ExperimentTable gamma_convergence_experiment(const RecoveryPlan& plan,
                                             const std::vector<double>& epsilon_ladder,
                                             const Rect& domain, double step_factor,
                                             int threads) {
    if (epsilon_ladder.empty()) {
        throw std::invalid_argument("gamma_convergence_experiment: empty epsilon ladder");
    }
    const double predicted = gamma_limit_energy(plan_spectrum(plan));
    ExperimentTable table;
    for (double eps : epsilon_ladder) {
        ExperimentRow row;
        row.epsilon = eps;
        row.predicted = predicted;
        try {
            const VortexConfig cfg = build_recovery(plan, eps, domain);
            row.admissible = true;
            const double log_eps = std::abs(std::log(eps));
            const EnergyEstimate upper = energy_upper(cfg, domain, eps / step_factor, threads);
            row.upper = upper.value;
            row.upper_error = upper.refinement_error;
            row.lower = energy_lower(cfg, domain);
            row.upper_over_log = row.upper / log_eps;
            row.lower_over_log = row.lower / log_eps;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));
    }
    table.upper_trend_decreasing = true;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        if (!table.rows[i].ok || !table.rows[i + 1].ok ||
            !(table.rows[i + 1].upper_over_log < table.rows[i].upper_over_log)) {
            table.upper_trend_decreasing = false;
        }
    }
    // Linear extrapolation of upper/|log eps| in 1/|log eps| to zero, using
    // the two smallest ladder entries.
    if (table.rows.size() >= 2) {
        const auto& a = table.rows[table.rows.size() - 2];
        const auto& b = table.rows[table.rows.size() - 1];
        if (a.ok && b.ok) {
            const double xa = 1.0 / std::abs(std::log(a.epsilon));
            const double xb = 1.0 / std::abs(std::log(b.epsilon));
            const double slope = (a.upper_over_log - b.upper_over_log) / (xa - xb);
            table.extrapolated_upper = b.upper_over_log - slope * xb;
        }
    }
    return table;
}

std::string ExperimentTable::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "epsilon,upper_over_log,lower_over_log,predicted,admissible,status\n";
    for (const auto& row : rows) {
        out << row.epsilon << ",";
        if (row.ok) {
            out << row.upper_over_log << "," << row.lower_over_log << ",";
        } else {
            out << ",,";
        }
        out << row.predicted << "," << (row.admissible ? "true" : "false") << ","
            << (row.ok ? "ok" : row.error) << "\n";
    }
    out << "extrapolated," << extrapolated_upper << ",," << (rows.empty() ? 0.0 : rows[0].predicted)
        << ",,"
        << (upper_trend_decreasing ? "upper_trend_decreasing" : "upper_trend_not_monotone")
        << "\n";
    return out.str();
}

}  // namespace vortexscale
