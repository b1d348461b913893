// Microbenchmarks for the hot paths: RNG block generation, configuration
// model sampling, spectrum classification, walk-table recurrences, and the
// generating-function solver that backs density curves.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "sreg/graphs.hpp"
#include "sreg/matrices.hpp"
#include "sreg/quotient.hpp"
#include "sreg/rng.hpp"
#include "sreg/treewalks.hpp"

namespace {

sreg::QuotientSpec two_cell_spec() {
    sreg::QuotientSpec spec;
    spec.S.resize(2, 2);
    spec.S << 14, 2, 2, 2;
    spec.F = Eigen::MatrixXd::Ones(2, 2);
    spec.b = Eigen::VectorXd::Zero(2);
    return spec;
}

sreg::QuotientSpec cubic_spec() {
    sreg::QuotientSpec spec;
    spec.S.resize(1, 1);
    spec.S << 3;
    spec.F = Eigen::MatrixXd::Ones(1, 1);
    spec.b = Eigen::VectorXd::Zero(1);
    return spec;
}

void bm_rng_block(benchmark::State& state) {
    sreg::philox4x64 rng(1);
    std::uint64_t acc = 0;
    for (auto _ : state) {
        acc += rng();
    }
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_rng_block);

void bm_sample_configuration(benchmark::State& state) {
    auto spec = two_cell_spec();
    std::vector<std::int64_t> n = {600, 600};
    int trial = 0;
    for (auto _ : state) {
        auto rng = sreg::philox4x64::stream(99, trial++);
        auto g = sreg::sample_configuration_model(spec, n, rng);
        benchmark::DoNotOptimize(g.adj.size());
    }
}
BENCHMARK(bm_sample_configuration);

void bm_classify(benchmark::State& state) {
    auto spec = two_cell_spec();
    auto rng = sreg::philox4x64::stream(99, 0);
    auto g = sreg::sample_configuration_model(
        spec, {state.range(0), state.range(0)}, rng);
    sreg::SRegularMatrix T(g, spec);
    for (auto _ : state) {
        auto cls = sreg::classify(T);
        benchmark::DoNotOptimize(cls.lambda_b);
    }
}
BENCHMARK(bm_classify)->Arg(100)->Arg(200)->Arg(400);

void bm_walk_table_exact(benchmark::State& state) {
    auto spec = two_cell_spec();
    for (auto _ : state) {
        auto table = sreg::walk_table_exact(spec, state.range(0));
        benchmark::DoNotOptimize(table.cell[0].back());
    }
}
// counts grow like the bulk radius to the ell, so int64 holds to ell ~ 20
BENCHMARK(bm_walk_table_exact)->Arg(12)->Arg(20);

void bm_walk_table_double(benchmark::State& state) {
    auto spec = two_cell_spec();
    for (auto _ : state) {
        auto table = sreg::walk_table(spec, state.range(0));
        benchmark::DoNotOptimize(table.cell[0].back());
    }
}
BENCHMARK(bm_walk_table_double)->Arg(48);

void bm_gf_solve_cold(benchmark::State& state) {
    auto spec = two_cell_spec();
    sreg::GFSystem sys(spec);
    // just off the branch cut, the worst case for the continuation
    std::complex<double> z(1.92, 1e-3);
    std::complex<double> y = 1.0 / z;
    for (auto _ : state) {
        auto p = sys.solve(y);
        benchmark::DoNotOptimize(p.residual);
    }
}
BENCHMARK(bm_gf_solve_cold);

void bm_density_curve(benchmark::State& state) {
    auto spec = cubic_spec();
    std::vector<double> grid(201);
    for (int i = 0; i < 201; ++i) grid[i] = -3.0 + 6.0 * i / 200.0;
    for (auto _ : state) {
        auto curve = sreg::density_curve(spec, grid);
        benchmark::DoNotOptimize(curve.mixture[100]);
    }
}
BENCHMARK(bm_density_curve);

}  // namespace

BENCHMARK_MAIN();
