#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vortexscale/core_radius.hpp"
#include "vortexscale/multiscale.hpp"

using namespace vortexscale;

namespace {
const Rect kDomain{0.0, 0.0, 2.0, 2.0};
}

TEST_CASE("admissibility closed cases") {
    SUBCASE("single atom well inside") {
        const auto report =
            check_admissible(AtomicMeasure::dirac({1.0, 1.0}, 1.0), 0.1, kDomain);
        CHECK(report.admissible);
    }
    SUBCASE("pair at distance 3 eps is rejected and named") {
        const double eps = 0.05;
        const AtomicMeasure mu = AtomicMeasure::dirac({1.0, 1.0}, 1.0) +
                                 AtomicMeasure::dirac({1.0 + 3.0 * eps, 1.0}, 1.0);
        const auto report = check_admissible(mu, eps, kDomain);
        CHECK(!report.admissible);
        REQUIRE(!report.violations.empty());
        CHECK(report.violations[0].find("atoms 0 and 1") != std::string::npos);
    }
    SUBCASE("atom at boundary distance 1.5 eps is rejected") {
        const double eps = 0.1;
        const auto report =
            check_admissible(AtomicMeasure::dirac({1.5 * eps, 1.0}, 1.0), eps, kDomain);
        CHECK(!report.admissible);
        CHECK(report.violations[0].find("boundary distance") != std::string::npos);
    }
}

TEST_CASE("phase gradient circulation counts enclosed charges") {
    const AtomicMeasure mu = AtomicMeasure::dirac({1.0, 1.0}, 2.0) +
                             AtomicMeasure::dirac({0.4, 0.4}, -1.0);
    const PhaseField phase(mu);
    CHECK(phase.circulation({1.0, 1.0}, 0.2) ==
          doctest::Approx(2.0 * kPi * 2.0).epsilon(1e-3));
    CHECK(phase.circulation({0.4, 0.4}, 0.1) ==
          doctest::Approx(-2.0 * kPi).epsilon(1e-3));
    // Loop enclosing both.
    CHECK(phase.circulation({0.7, 0.7}, 0.65) ==
          doctest::Approx(2.0 * kPi * 1.0).epsilon(1e-3));
    // Gradient magnitude 1/r for a unit charge.
    const PhaseField unit(AtomicMeasure::dirac({0.0, 0.0}, 1.0));
    const Vec2 g = unit.gradient({0.3, 0.4});
    CHECK(std::hypot(g.x, g.y) == doctest::Approx(1.0 / 0.5));
}

TEST_CASE("energy_upper: empty, guards, closed forms") {
    CHECK(energy_upper(VortexConfig{AtomicMeasure{}, 1e-2}, kDomain, 1e-3).value == 0.0);
    // Step coarser than eps/4 is rejected.
    CHECK_THROWS(energy_upper(VortexConfig{AtomicMeasure::dirac({1.0, 1.0}, 1.0), 1e-2},
                              kDomain, 1e-2));

    // Centered vortex in the unit square: the exact drilled integral is
    // pi log(1/eps) + (1/2) int log R(theta) dtheta, an annulus sandwich
    // pi log(1/(2 eps)) <= E <= pi log(sqrt(2)/(2 eps)) + corner mass.
    const Rect unit_square{0.0, 0.0, 1.0, 1.0};
    const double eps = 1e-3;
    const EnergyEstimate e = energy_upper(
        VortexConfig{AtomicMeasure::dirac({0.5, 0.5}, 1.0), eps}, unit_square, eps / 4.0);
    const double exact = kPi * std::log(1.0 / eps) - 1.8315;  // half the log R integral
    CHECK(e.value == doctest::Approx(exact).epsilon(0.005));
    CHECK(e.value >= kPi * std::log(0.5 / eps));
    CHECK(e.refinement_error < 0.1);
}

TEST_CASE("energy_upper sign-flip and rigid-motion invariance") {
    const double eps = 2e-3;
    const double sep = 0.3;
    auto config_at = [&](Point center, double orientation) {
        const Point offset{sep / 2.0 * std::cos(orientation),
                           sep / 2.0 * std::sin(orientation)};
        return VortexConfig{AtomicMeasure::dirac(center + offset, 1.0) +
                                AtomicMeasure::dirac(center - offset, -1.0),
                            eps};
    };
    const double base = energy_upper(config_at({1.0, 1.0}, 0.0), kDomain, eps / 4.0).value;

    // Global sign flip.
    const VortexConfig flipped{config_at({1.0, 1.0}, 0.0).mu.scaled(-1.0), eps};
    CHECK(energy_upper(flipped, kDomain, eps / 4.0).value == doctest::Approx(base));

    // Rotation by pi/2 about the domain center preserves boundary distances
    // and maps the square quadrature grid onto itself.
    const double rotated = energy_upper(config_at({1.0, 1.0}, kPi / 2.0), kDomain,
                                        eps / 4.0).value;
    CHECK(rotated == doctest::Approx(base).epsilon(1e-6));

    // Strip-parallel evaluation is independent of the worker count.
    const double threaded = energy_upper(config_at({1.0, 1.0}, 0.0), kDomain,
                                         eps / 4.0, 3).value;
    CHECK(threaded == base);
}

TEST_CASE("energy_lower closed cases") {
    CHECK(energy_lower(VortexConfig{AtomicMeasure{}, 1e-3}, kDomain) == 0.0);

    const double eps = 1e-3;
    const VortexConfig vortex{AtomicMeasure::dirac({1.0, 1.0}, 1.0), eps};
    const double lower = energy_lower(vortex, kDomain);
    CHECK(lower >= 0.85 * kPi * std::log(1.0 / eps));
    CHECK(lower <= kPi * std::log(1.0 / eps) + 1e-9);
}

TEST_CASE("sandwich: lower bound below quadrature upper bound") {
    const double eps = 1e-3;
    for (int which = 0; which < 3; ++which) {
        AtomicMeasure mu;
        if (which == 0) mu = AtomicMeasure::dirac({1.0, 1.0}, 1.0);
        if (which == 1) {
            mu = AtomicMeasure::dirac({0.7, 0.7}, 1.0) +
                 AtomicMeasure::dirac({1.3, 1.3}, -1.0);
        }
        if (which == 2) {
            mu = AtomicMeasure::dirac({0.6, 1.0}, 2.0) +
                 AtomicMeasure::dirac({1.4, 1.0}, 1.0);
        }
        const VortexConfig cfg{mu, eps};
        const EnergyEstimate upper = energy_upper(cfg, kDomain, eps / 4.0);
        CHECK(energy_lower(cfg, kDomain) <= upper.value + upper.refinement_error + 1e-6);
    }
}

TEST_CASE("build_recovery realizes plans") {
    SUBCASE("plan with only a vortex") {
        RecoveryPlan plan;
        plan.mu = AtomicMeasure::dirac({1.0, 1.0}, 1.0);
        const VortexConfig cfg = build_recovery(plan, 1e-3, kDomain);
        CHECK(cfg.mu.size() == 1);
        CHECK(cfg.mu.atoms()[0].weight == 1.0);
    }
    SUBCASE("half-exponent cluster at eps = 1e-4 has separation 0.02") {
        RecoveryPlan plan;
        plan.clusters = {{{1.0, 1.0}, 0.5, 2}};
        const VortexConfig cfg = build_recovery(plan, 1e-4, kDomain);
        REQUIRE(cfg.mu.size() == 2);
        CHECK(distance(cfg.mu.atoms()[0].position, cfg.mu.atoms()[1].position) ==
              doctest::Approx(0.02));
        CHECK(cfg.mu.total_weight() == doctest::Approx(0.0));
    }
    SUBCASE("zero-exponent cluster separation follows 2/|log eps|") {
        RecoveryPlan plan;
        plan.clusters = {{{1.0, 1.0}, 0.0, 2}};
        const double eps = 1e-4;
        const VortexConfig cfg = build_recovery(plan, eps, kDomain);
        REQUIRE(cfg.mu.size() == 2);
        CHECK(distance(cfg.mu.atoms()[0].position, cfg.mu.atoms()[1].position) ==
              doctest::Approx(2.0 / std::abs(std::log(eps))));
    }
    SUBCASE("too-large eps is rejected with a feasibility hint") {
        RecoveryPlan plan;
        plan.clusters = {{{1.0, 1.0}, 0.5, 2}};
        // Separation 2 sqrt(eps) < 4 eps once eps > 1/4.
        CHECK_THROWS_WITH_AS(static_cast<void>(build_recovery(plan, 0.3, kDomain)),
                             doctest::Contains("minimal feasible epsilon"),
                             std::invalid_argument);
    }
    SUBCASE("round trip through spectrum detection") {
        RecoveryPlan plan;
        plan.mu = AtomicMeasure::dirac({1.4, 1.4}, 1.0);
        plan.clusters = {{{0.6, 0.6}, 0.5, 2}};
        const double eps = 1e-4;
        const VortexConfig cfg = build_recovery(plan, eps, kDomain);
        const ScaleSpectrum spec = detect_spectrum(cfg.mu, eps, kDomain);
        REQUIRE(spec.jumps.size() == 2);
        CHECK(std::abs(spec.jumps[1] - 0.5) <= 1.0 / 64.0);
        CHECK(spec.nu[0].total_variation() == doctest::Approx(1.0));
        CHECK(spec.nu[1].total_variation() == doctest::Approx(3.0));
        CHECK(gamma_limit_energy(spec) ==
              doctest::Approx(gamma_limit_energy(plan_spectrum(plan))).epsilon(0.02));
    }
}

TEST_CASE("plan spectrum closed forms") {
    RecoveryPlan plan;
    plan.mu = AtomicMeasure::dirac({1.0, 1.0}, 1.0);
    plan.clusters = {{{0.5, 0.5}, 0.3, 2}, {{1.5, 1.5}, 0.6, 2}};
    const ScaleSpectrum spec = plan_spectrum(plan);
    REQUIRE(spec.jumps == std::vector<double>{0.0, 0.3, 0.6});
    CHECK(spec.nu[0].total_variation() == 1.0);
    CHECK(spec.nu[1].total_variation() == 3.0);
    CHECK(spec.nu[2].total_variation() == 5.0);
    CHECK(gamma_limit_energy(spec) == doctest::Approx(kPi * 3.2));
    CHECK(gamma_limit_energy_by_defects(spec) == doctest::Approx(kPi * 3.2));
}

TEST_CASE("far-field dipole energy stays bounded as eps shrinks") {
    // Quadrature energy outside the 8 eps^s ball around the midpoint.
    auto far_field_energy = [](double eps) {
        const double s = 0.5;
        const double sep = 2.0 * std::pow(eps, s);
        const Point center{1.0, 1.0};
        const AtomicMeasure mu = AtomicMeasure::dirac({1.0 - sep / 2.0, 1.0}, 1.0) +
                                 AtomicMeasure::dirac({1.0 + sep / 2.0, 1.0}, -1.0);
        const PhaseField phase(mu);
        const double cut = 8.0 * std::pow(eps, s);
        const int n = 600;
        const double h = 2.0 / n;
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const Point p{(i + 0.5) * h, (j + 0.5) * h};
                if (distance(p, center) <= cut) continue;
                const Vec2 g = phase.gradient(p);
                total += 0.5 * (g.x * g.x + g.y * g.y);
            }
        }
        return total * h * h;
    };
    const double coarse = far_field_energy(1e-3);
    const double fine = far_field_energy(1e-4);
    CHECK(fine <= coarse + 0.5);
}

TEST_CASE("gamma convergence experiment on a short ladder") {
    RecoveryPlan plan;
    plan.mu = AtomicMeasure::dirac({1.0, 1.0}, 1.0);
    const ExperimentTable table =
        gamma_convergence_experiment(plan, {1e-2, 3e-3, 1e-3}, kDomain);
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        REQUIRE(row.ok);
        CHECK(row.admissible);
        CHECK(row.predicted == doctest::Approx(kPi));
        CHECK(row.lower_over_log <= row.upper_over_log + 1e-9);
    }
    CHECK(table.upper_trend_decreasing);
    CHECK(table.extrapolated_upper == doctest::Approx(kPi).epsilon(0.02));
    const std::string csv = table.to_csv();
    CHECK(csv.find("epsilon,upper_over_log,lower_over_log,predicted,admissible") !=
          std::string::npos);
    CHECK(csv.find("extrapolated") != std::string::npos);
}
