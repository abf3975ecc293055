#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "vortexscale/ball_construction.hpp"
#include "vortexscale/core_radius.hpp"
#include "vortexscale/flat_norm.hpp"
#include "vortexscale/gl_field.hpp"
#include "vortexscale/mollifier.hpp"

namespace {

using namespace vortexscale;

const Rect kDomain{0.0, 0.0, 2.0, 2.0};

AtomicMeasure random_measure(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(0.2, 1.8);
    std::uniform_int_distribution<int> weight(1, 2);
    std::vector<WeightedAtom> atoms;
    for (int i = 0; i < n; ++i) {
        atoms.push_back({{coord(rng), coord(rng)},
                         static_cast<double>(weight(rng) * (i % 2 == 0 ? 1 : -1))});
    }
    return AtomicMeasure(atoms);
}

void BM_FlatNorm(benchmark::State& state) {
    const AtomicMeasure mu = random_measure(static_cast<int>(state.range(0)), 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flat_norm(mu, kDomain));
    }
}
BENCHMARK(BM_FlatNorm)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_BallConstruction(benchmark::State& state) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    std::vector<Ball> balls;
    while (balls.size() < static_cast<std::size_t>(state.range(0))) {
        const Ball cand{{coord(rng), coord(rng)}, 0.05};
        bool ok = true;
        for (const auto& b : balls) {
            if (!closures_disjoint(b, cand)) ok = false;
        }
        if (ok) balls.push_back(cand);
    }
    std::vector<WeightedAtom> atoms;
    for (const auto& b : balls) atoms.push_back({b.center, 1.0});
    const AtomicMeasure mu(atoms);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_construction(balls, mu, 200.0));
    }
}
BENCHMARK(BM_BallConstruction)->Arg(8)->Arg(32)->Arg(64);

void BM_EnergyUpper(benchmark::State& state) {
    const double eps = 1.0 / static_cast<double>(state.range(0));
    const VortexConfig cfg{AtomicMeasure::dirac({1.0, 1.0}, 1.0), eps};
    for (auto _ : state) {
        benchmark::DoNotOptimize(energy_upper(cfg, kDomain, eps / 4.0, 1).value);
    }
}
BENCHMARK(BM_EnergyUpper)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_MollifiedTv(benchmark::State& state) {
    const Mollifier rho;
    const AtomicMeasure mu = random_measure(6, 11);
    const double eta = 0.05;
    const MollifiedMeasure nu = mollify(mu, eta, rho);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tv_of_mollified(nu, kDomain, eta / 8.0));
    }
}
BENCHMARK(BM_MollifiedTv)->Unit(benchmark::kMillisecond);

void BM_SyntheticFieldEnergy(benchmark::State& state) {
    const double eps = 1.0 / static_cast<double>(state.range(0));
    RecoveryPlan plan;
    plan.mu = AtomicMeasure::dirac({0.5, 0.5}, 1.0);
    const Rect square{0.0, 0.0, 1.0, 1.0};
    const Potential W = Potential::standard();
    for (auto _ : state) {
        const GLField u = synthetic_field(plan, eps, square, eps / 4.0);
        benchmark::DoNotOptimize(gl_energy(u, W));
    }
}
BENCHMARK(BM_SyntheticFieldEnergy)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
