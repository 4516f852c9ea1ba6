#include <random>

#include <benchmark/benchmark.h>

#include "evqr/gaussian.hpp"
#include "evqr/solver.hpp"

namespace {

using namespace evqr;

Problem random_problem(int n, int m, int dx, int dy, double epsilon,
                       unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix u(n, dy), xy(m, dx + dy);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dy; ++k) u(i, k) = unif(rng);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < dx + dy; ++k) xy(j, k) = unif(rng);
    Vector a = Vector::Constant(n, 1.0 / n);
    Vector b = Vector::Constant(m, 1.0 / m);
    return Problem(DiscreteMeasure(a, u), DiscreteMeasure(b, xy), dx, epsilon);
}

GaussianModel random_model(int dx, int dy, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(dx + dy, dx + dy);
    for (int i = 0; i < dx + dy; ++i)
        for (int j = 0; j < dx + dy; ++j) a(i, j) = normal(rng);
    Matrix sigma = a * a.transpose() +
                   0.5 * (dx + dy) * Matrix::Identity(dx + dy, dx + dy);
    return GaussianModel(Vector::Zero(dy), SymMatrix(sigma.topLeftCorner(dx, dx)),
                         sigma.topRightCorner(dx, dy),
                         SymMatrix(sigma.bottomRightCorner(dy, dy)));
}

void BM_Solve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Problem p = random_problem(n, n, 2, 2, 0.5, 7);
    SolverOptions opts;
    opts.tol = 1e-8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(p, opts));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_Solve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Problem p = random_problem(n, n, 2, 2, 0.5, 7);
    Potentials pots = Potentials::zero(p);
    for (auto _ : state) {
        pots = sweep(p, pots);
        benchmark::DoNotOptimize(pots);
    }
}
BENCHMARK(BM_Sweep)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_GRowNewton(benchmark::State& state) {
    const Problem p = random_problem(16, 64, 3, 2, 0.5, 11);
    const Potentials pots = sweep(p, Potentials::zero(p));
    const Vector theta0 = Vector::Zero(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_g_row(p, 5, pots.h, theta0));
    }
}
BENCHMARK(BM_GRowNewton)->Unit(benchmark::kMicrosecond);

void BM_LambdaEps(benchmark::State& state) {
    const GaussianModel model =
        random_model(static_cast<int>(state.range(0)),
                     static_cast<int>(state.range(0)), 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lambda_eps(model, 0.1));
    }
}
BENCHMARK(BM_LambdaEps)->Arg(5)->Arg(20);

void BM_BuresW2(benchmark::State& state) {
    const GaussianModel model = random_model(4, 4, 17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(w2_exact(model, 1e-3));
    }
}
BENCHMARK(BM_BuresW2);

} // namespace

BENCHMARK_MAIN();
