#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rxnet/compile.hpp"
#include "rxnet/kinetics.hpp"
#include "rxnet/solver.hpp"
#include "support/fixtures.hpp"
#include "support/random_network.hpp"

using namespace rxnet;
using namespace rxnet::testing;

namespace {

NetworkSpec sized_network(int n_species, int n_reactions) {
    std::mt19937 rng(7);
    NetworkParams p;
    p.max_species = n_species;
    p.max_reactions = n_reactions;
    // Resample until the generator uses the full requested size.
    for (;;) {
        auto spec = random_network(rng, p);
        if (spec.n_species() == n_species && spec.n_reactions() == n_reactions)
            return spec;
    }
}

void bm_rhs_sparse(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = sized_network(n, 2 * n);
    const auto net = compile(spec);
    std::mt19937 rng(11);
    const auto x = random_state(rng, n, 0.1, 2.0);
    std::vector<double> out(n), scratch(spec.n_reactions());
    for (auto _ : state) {
        eval_rhs(net, x, out, scratch);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_rhs_sparse)->Arg(8)->Arg(32)->Arg(128);

void bm_rhs_dense_oracle(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = sized_network(n, 2 * n);
    std::mt19937 rng(11);
    const auto x = random_state(rng, n, 0.1, 2.0);
    for (auto _ : state) {
        auto out = eval_rhs_dense_oracle(spec, x);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_rhs_dense_oracle)->Arg(8)->Arg(32)->Arg(128);

void bm_jacobian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = sized_network(n, 2 * n);
    const auto net = compile(spec);
    std::mt19937 rng(11);
    const auto x = random_state(rng, n, 0.1, 2.0);
    SparseJacobian jac(net);
    for (auto _ : state) {
        eval_jacobian(net, x, jac);
        benchmark::DoNotOptimize(jac);
    }
}
BENCHMARK(bm_jacobian)->Arg(8)->Arg(32)->Arg(128);

void bm_compile(benchmark::State& state) {
    const auto spec = sized_network(32, 64);
    for (auto _ : state) {
        auto net = compile(spec);
        benchmark::DoNotOptimize(net);
    }
}
BENCHMARK(bm_compile);

void bm_robertson(benchmark::State& state) {
    const auto spec = robertson_spec();
    const auto net = compile(spec);
    SolverOptions o;
    o.method = state.range(0) == 0 ? Method::rosenbrock4 : Method::bdf;
    o.rtol = 1e-6;
    o.atol = 1e-10;
    for (auto _ : state) {
        auto traj = integrate(net, spec.initial, 0.0, 1e5, o);
        benchmark::DoNotOptimize(traj);
    }
}
BENCHMARK(bm_robertson)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
