#include <benchmark/benchmark.h>

#include <random>

#include "splitfit/boundary.hpp"
#include "splitfit/cells.hpp"
#include "splitfit/fitting.hpp"
#include "splitfit/udf.hpp"

namespace {

using namespace splitfit;

std::vector<Vec3> sphere_points(int n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec3 d(g(rng), g(rng), g(rng));
        d.normalize();
        pts.push_back(Vec3::Constant(0.5) + 0.3 * d);
    }
    return pts;
}

void BM_UdfFromPoints(benchmark::State& state) {
    Config cfg;
    cfg.r = int(state.range(0));
    const auto pts = sphere_points(20000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(udf_from_points(pts, cfg));
    }
}
BENCHMARK(BM_UdfFromPoints)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DetectAnalytic(benchmark::State& state) {
    Config cfg;
    cfg.r = int(state.range(0));
    const UdfGrid udf = udf_from_points(sphere_points(20000), cfg);
    DetectorParams params;
    params.tau = cfg.detect_tau();
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_analytic(udf, params, 1));
    }
}
BENCHMARK(BM_DetectAnalytic)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FitCylinder(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 1000; ++i) {
        const double ang = 6.283185307179586 * u(rng);
        pts.push_back(Vec3(0.5 + 0.2 * std::cos(ang), 0.5 + 0.2 * std::sin(ang),
                           0.2 + 0.6 * u(rng)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_surface(pts, SurfaceKind::Cylinder));
    }
}
BENCHMARK(BM_FitCylinder)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
