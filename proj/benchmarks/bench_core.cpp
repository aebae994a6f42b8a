// Microbenchmarks for the hot paths: uniformization, the curvature and
// Poisson solves, the spectral gap, and a full fixed-point run.

#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "curvlab/elliptic.hpp"
#include "curvlab/fixed_point.hpp"
#include "curvlab/mesh.hpp"
#include "curvlab/sections.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

namespace {

const curvlab::Surface& octagon(int n) {
  static std::map<int, curvlab::Surface> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache
             .emplace(n, curvlab::Surface::uniformize(curvlab::regular_octagon_genus2(n)))
             .first;
  }
  return it->second;
}

void BM_Uniformize(benchmark::State& state) {
  const curvlab::TriangleMesh mesh =
      curvlab::regular_octagon_genus2(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    curvlab::Surface s = curvlab::Surface::uniformize(mesh);
    benchmark::DoNotOptimize(s.volume());
  }
  state.SetLabel(std::to_string(mesh.n_vertices()) + " vertices");
}
BENCHMARK(BM_Uniformize)->Arg(3)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_GaussSolve(benchmark::State& state) {
  const curvlab::Surface& s = octagon(static_cast<int>(state.range(0)));
  const curvlab::ScalarField f = curvlab::build_section_norm(s, {{0, 1}}).f_alpha;
  const double eta = 0.5;
  curvlab::GaussOptions opts;
  opts.t = 0.5 * curvlab::max_admissible_t(f, eta);
  for (auto _ : state) {
    curvlab::GaussSolution sol = curvlab::solve_gauss(s, f, eta, opts);
    benchmark::DoNotOptimize(sol.residual_sup);
  }
  state.SetLabel(std::to_string(s.n_vertices()) + " vertices");
}
BENCHMARK(BM_GaussSolve)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_PoissonSolve(benchmark::State& state) {
  const curvlab::Surface& s = octagon(static_cast<int>(state.range(0)));
  Eigen::VectorXd raw = Eigen::VectorXd::LinSpaced(s.n_vertices(), -1.0, 1.0);
  curvlab::ScalarField rhs = s.field(raw);
  rhs = rhs - curvlab::mean(rhs);
  for (auto _ : state) {
    curvlab::PoissonSolution sol = curvlab::solve_poisson_zero_mean(s, rhs);
    benchmark::DoNotOptimize(sol.iterations);
  }
  state.SetLabel(std::to_string(s.n_vertices()) + " vertices");
}
BENCHMARK(BM_PoissonSolve)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SpectralGap(benchmark::State& state) {
  const curvlab::Surface& s = octagon(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    curvlab::EigenPairs pairs = curvlab::spectral_gap(s, 1);
    benchmark::DoNotOptimize(pairs.values[0]);
  }
  state.SetLabel(std::to_string(s.n_vertices()) + " vertices");
}
BENCHMARK(BM_SpectralGap)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_FixedPoint(benchmark::State& state) {
  const curvlab::Surface& s = octagon(static_cast<int>(state.range(0)));
  const curvlab::GeometryConstants gc = curvlab::poisson_constant(s);
  const curvlab::SectionNormSpec spec = curvlab::build_section_norm(s, {{0, 1}});
  curvlab::FixedPointProblem prob;
  prob.surface = &s;
  prob.f = spec.f_alpha;
  prob.eta = 0.5;
  prob.R = 0.02;
  prob.A = spec.bal;
  prob.C = gc.poisson_constant();
  prob.vol = s.volume();
  curvlab::FixedPointOptions opts;
  opts.override_hypothesis = true;
  opts.constants = &gc;
  for (auto _ : state) {
    curvlab::FixedPointCertificate cert = curvlab::run_fixed_point(prob, opts);
    benchmark::DoNotOptimize(cert.fixed_point_gap);
  }
  state.SetLabel(std::to_string(s.n_vertices()) + " vertices");
}
BENCHMARK(BM_FixedPoint)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
