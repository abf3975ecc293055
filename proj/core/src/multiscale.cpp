#include "vortexscale/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "vortexscale/flat_norm.hpp"

namespace vortexscale {

namespace {

std::vector<Ball> initial_balls(const AtomicMeasure& mu, double epsilon) {
    std::vector<Ball> balls;
    for (const auto& atom : mu.atoms()) balls.push_back(Ball{atom.position, epsilon});
    return balls;
}

// Charge multiset of the nonzero-charge balls at time t, with no containment
// filter. Within an epoch this is constant, and it changes only at merge
// events, never when a ball crosses the domain boundary, so it is the robust
// jump detector at finite scale.
std::vector<long long> charge_signature(const WeightedBalls& w, double t) {
    const std::size_t k = w.trajectory().epoch_index_at(t);
    std::vector<long long> sig;
    for (double q : w.charges_at_epoch(k)) {
        const long long rounded = std::llround(q);
        if (rounded != 0) sig.push_back(std::llabs(rounded));
    }
    std::sort(sig.begin(), sig.end());
    return sig;
}

AtomicMeasure coarse_at_time(const WeightedBalls& w, const Rect& domain, double t) {
    const std::size_t k = w.trajectory().epoch_index_at(t);
    const auto& epoch = w.trajectory().epochs()[k];
    const double growth = (1.0 + t) / (1.0 + epoch.start);
    std::vector<WeightedAtom> atoms;
    for (std::size_t i = 0; i < epoch.balls.size(); ++i) {
        const Ball ball{epoch.balls[i].center, epoch.balls[i].entry_radius * growth};
        if (!domain.contains_ball(ball)) continue;
        const double q = w.charge(k, i);
        if (q != 0.0) atoms.push_back(WeightedAtom{ball.center, q});
    }
    return AtomicMeasure(std::move(atoms));
}

// Pair the defect atoms (nu minus the matched |mu_limit| part) into dipole
// midpoints. Positions drift with the aggregating balls, so mu_limit atoms
// are matched to the nearest nu atom.
AtomicMeasure pair_defects(const AtomicMeasure& nu, const AtomicMeasure& mu_limit) {
    struct Unit {
        Point position;
        long long count;
    };
    std::vector<Unit> units;
    for (const auto& atom : nu.atoms()) {
        units.push_back(Unit{atom.position, std::llround(atom.weight)});
    }
    for (const auto& atom : mu_limit.atoms()) {
        long long remaining = std::llabs(std::llround(atom.weight));
        while (remaining > 0) {
            std::size_t best = units.size();
            double best_d = 0.0;
            for (std::size_t i = 0; i < units.size(); ++i) {
                if (units[i].count <= 0) continue;
                const double d = distance(units[i].position, atom.position);
                if (best == units.size() || d < best_d) {
                    best = i;
                    best_d = d;
                }
            }
            if (best == units.size()) {
                throw std::runtime_error(
                    "detect_spectrum: plateau density smaller than the limit vorticity");
            }
            const long long take = std::min(remaining, units[best].count);
            units[best].count -= take;
            remaining -= take;
        }
    }
    long long leftover = 0;
    for (const auto& u : units) leftover += u.count;
    if (leftover % 2 != 0) {
        throw std::runtime_error("detect_spectrum: defect mass is odd, structure violated");
    }
    std::vector<WeightedAtom> paired;
    while (true) {
        std::size_t first = units.size();
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (units[i].count > 0) {
                first = i;
                break;
            }
        }
        if (first == units.size()) break;
        units[first].count -= 1;
        std::size_t mate = units.size();
        double mate_d = 0.0;
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (units[i].count <= 0) continue;
            const double d = distance(units[i].position, units[first].position);
            if (mate == units.size() || d < mate_d) {
                mate = i;
                mate_d = d;
            }
        }
        if (mate == units.size()) {
            throw std::runtime_error("detect_spectrum: unpaired defect unit");
        }
        units[mate].count -= 1;
        paired.push_back(
            WeightedAtom{0.5 * (units[first].position + units[mate].position), 1.0});
    }
    return AtomicMeasure(std::move(paired));
}

}  // namespace

AtomicMeasure coarse_vorticity(const WeightedBalls& w, const Rect& domain, double epsilon,
                               double s) {
    const double t = ScaleProbe{epsilon, s}.time();
    if (t > w.trajectory().horizon() * (1.0 + 1e-12)) {
        throw std::invalid_argument("coarse_vorticity: trajectory horizon " +
                                    std::to_string(w.trajectory().horizon()) +
                                    " shorter than required probe time " + std::to_string(t));
    }
    return coarse_at_time(w, domain, t);
}

ScaleSpectrum detect_spectrum(const AtomicMeasure& mu, double epsilon, const Rect& domain,
                              double s_grid) {
    if (!mu.integer_weighted()) {
        throw std::invalid_argument("detect_spectrum: measure must be integer-weighted");
    }
    if (!(epsilon > 0.0) || epsilon * mu.total_variation() >= domain.diameter()) {
        throw std::invalid_argument("detect_spectrum: epsilon too large for the domain");
    }
    ScaleSpectrum spectrum;
    spectrum.jumps = {0.0};
    if (mu.empty()) {
        spectrum.nu = {AtomicMeasure{}};
        spectrum.xi_def = {AtomicMeasure{}};
        return spectrum;
    }
    const int cells = std::max(2, static_cast<int>(std::llround(1.0 / s_grid)));
    std::vector<double> samples;
    for (int k = 1; k < cells; ++k) samples.push_back(static_cast<double>(k) / cells);

    const double horizon = ScaleProbe{epsilon, samples.front()}.time();
    const WeightedBalls w = run_construction(initial_balls(mu, epsilon), mu, horizon);

    std::vector<std::vector<long long>> signatures;
    signatures.reserve(samples.size());
    for (double s : samples) {
        signatures.push_back(charge_signature(w, ScaleProbe{epsilon, s}.time()));
    }

    // Plateaus are maximal runs of equal signatures; every plateau must hold
    // at least two samples, otherwise the grid cannot localize the jumps.
    std::vector<std::pair<std::size_t, std::size_t>> plateaus;  // [first, last]
    std::size_t start = 0;
    for (std::size_t i = 1; i <= samples.size(); ++i) {
        if (i == samples.size() || signatures[i] != signatures[start]) {
            plateaus.emplace_back(start, i - 1);
            start = i;
        }
    }
    for (const auto& [first, last] : plateaus) {
        if (last == first) {
            throw std::runtime_error(
                "detect_spectrum: plateau with a single grid sample near s = " +
                std::to_string(samples[first]) + "; refine the scale grid");
        }
    }
    for (std::size_t p = 0; p + 1 < plateaus.size(); ++p) {
        const double below = samples[plateaus[p].second];
        const double above = samples[plateaus[p + 1].first];
        spectrum.jumps.push_back((below + above) / 2.0);
    }

    // Plateau representatives at the rightmost sample: the finest scale in
    // the plateau, where the aggregated structure is cleanest and fully
    // inside the domain for interior configurations.
    spectrum.mu_limit =
        coarse_at_time(w, domain, ScaleProbe{epsilon, samples[plateaus[0].second]}.time());
    for (const auto& [first, last] : plateaus) {
        const AtomicMeasure coarse =
            coarse_at_time(w, domain, ScaleProbe{epsilon, samples[last]}.time());
        spectrum.nu.push_back(coarse.absolute());
        spectrum.xi_def.push_back(pair_defects(spectrum.nu.back(), spectrum.mu_limit));
    }
    return spectrum;
}

double gamma_limit_energy(const ScaleSpectrum& spectrum) {
    double sum = 0.0;
    for (std::size_t k = 0; k < spectrum.jumps.size(); ++k) {
        const double s_next = (k + 1 < spectrum.jumps.size()) ? spectrum.jumps[k + 1] : 1.0;
        sum += (s_next - spectrum.jumps[k]) * spectrum.nu[k].total_variation();
    }
    return kPi * sum;
}

double gamma_limit_energy_by_defects(const ScaleSpectrum& spectrum) {
    const double mu_tv = spectrum.mu_limit.total_variation();
    double sum = mu_tv;
    double prev = mu_tv;
    for (std::size_t k = 0; k < spectrum.jumps.size(); ++k) {
        const double eta = spectrum.nu[k].total_variation() - prev;
        prev = spectrum.nu[k].total_variation();
        sum += (1.0 - spectrum.jumps[k]) * eta;
    }
    return kPi * sum;
}

std::string ScaleSpectrum::to_json_string() const {
    nlohmann::json out;
    out["S"] = jumps;
    nlohmann::json plateaus = nlohmann::json::array();
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        nlohmann::json plateau;
        plateau["s_from"] = jumps[k];
        plateau["s_to"] = (k + 1 < jumps.size()) ? jumps[k + 1] : 1.0;
        plateau["nu"] = nlohmann::json::parse(nu[k].to_json_string());
        plateau["nu_total"] = nu[k].total_variation();
        plateau["xi_def"] = nlohmann::json::parse(xi_def[k].to_json_string());
        plateaus.push_back(std::move(plateau));
    }
    out["plateaus"] = std::move(plateaus);
    out["mu_limit"] = nlohmann::json::parse(mu_limit.to_json_string());
    out["gamma_limit_energy"] = gamma_limit_energy(*this);
    return out.dump(2);
}

ConsistencyReport mollified_consistency_check(const AtomicMeasure& mu, double epsilon, double s,
                                              const Rect& domain, const Mollifier& rho) {
    ConsistencyReport report;
    const double eta = std::pow(epsilon, s);
    const MollifiedMeasure smeared = mollify(mu, eta, rho);
    report.tv_mollified = tv_of_mollified(smeared, domain, eta / 16.0);

    const double horizon = ScaleProbe{epsilon, s}.time();
    const WeightedBalls w = run_construction(initial_balls(mu, epsilon), mu,
                                             std::max(horizon, 0.0) + 1.0);
    const AtomicMeasure coarse = coarse_vorticity(w, domain, epsilon, s);
    report.nu_total = coarse.absolute().total_variation();
    report.tv_discrepancy = std::abs(report.tv_mollified - report.nu_total);
    // ||mu*rho_eta - coarse||_flat <= eta |mu| + ||mu - coarse||_flat:
    // smearing each atom moves it by at most eta against Lipschitz tests.
    report.flat_bound = eta * mu.total_variation() + flat_norm(mu - coarse, domain);
    return report;
}

}  // namespace vortexscale
