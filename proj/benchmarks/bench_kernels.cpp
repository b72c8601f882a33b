#include <benchmark/benchmark.h>

#include <random>

#include "pseudofit/bath.hpp"
#include "pseudofit/expfit.hpp"
#include "pseudofit/fockspace.hpp"
#include "pseudofit/gauge.hpp"

using namespace pseudofit;

namespace {

BathSpec ohmic_bath() {
    return BathSpec{OhmicFamily{1.0, 1.0}, inf, Statistics::bosonic, 0.0};
}

QuasiModel synthetic_model(int n) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(0.2, 3.0);
    QuasiModel m;
    m.poles.resize(n);
    m.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        m.poles[k] = Complex(unif(rng), -unif(rng));
        m.weights[k] = Complex(unif(rng), 0.3 * unif(rng));
    }
    return m;
}

}  // namespace

static void BM_BcfTimePoint(benchmark::State& state) {
    const BathSpec bath = ohmic_bath();
    const double t = double(state.range(0));
    RealVector grid(1);
    grid[0] = t;
    for (auto _ : state) {
        auto ts = bcf_time(bath, grid, 1e-10);
        benchmark::DoNotOptimize(ts.values[0]);
    }
}
BENCHMARK(BM_BcfTimePoint)->Arg(1)->Arg(10)->Arg(40);

static void BM_EspritFit(benchmark::State& state) {
    const int n_samples = int(state.range(0));
    const QuasiModel model = synthetic_model(6);
    RealVector grid = linspace(0.0, 10.0, n_samples);
    TimeSeries samples(grid, eval_quasi(model, grid));
    for (auto _ : state) {
        auto fit = esprit_fit(samples, {6, 1e-12});
        benchmark::DoNotOptimize(fit.rms_misfit);
    }
}
BENCHMARK(BM_EspritFit)->Arg(201)->Arg(801);

static void BM_GaugeSdp(benchmark::State& state) {
    const QuasiModel model = synthetic_model(int(state.range(0)));
    for (auto _ : state) {
        auto sol = solve_gauge_sdp(model, {1e-8, 1e-8, 50000});
        benchmark::DoNotOptimize(sol.equality_residual);
    }
}
BENCHMARK(BM_GaugeSdp)->Arg(2)->Arg(4);

static void BM_SparseApplyLeft(benchmark::State& state) {
    const int modes = 4, d = 4;
    FockSpace space(2, modes, d);
    Matrix coeff = Matrix::Identity(modes, modes);
    SparseOp op = space.one_body(coeff);
    Matrix rho = Matrix::Zero(space.dim, space.dim);
    rho(0, 0) = 1.0;
    Matrix out = Matrix::Zero(space.dim, space.dim);
    for (auto _ : state) {
        out.setZero();
        op.apply_left(out, rho, 1.0);
        benchmark::DoNotOptimize(out(0, 0));
    }
    state.SetItemsProcessed(state.iterations() * op.nnz());
}
BENCHMARK(BM_SparseApplyLeft);

BENCHMARK_MAIN();
