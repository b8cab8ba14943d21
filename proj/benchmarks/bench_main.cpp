#include <benchmark/benchmark.h>

#include "gglr/dag.hpp"
#include "gglr/embedding.hpp"
#include "gglr/gng.hpp"
#include "gglr/graph.hpp"
#include "gglr/io.hpp"
#include "gglr/rng.hpp"
#include "gglr/solvers.hpp"
#include "gglr/synthetic.hpp"

namespace {

gglr::Vector noisy_two_plane(gglr::Index side) {
  gglr::Rng rng(7);
  return gglr::add_gaussian_noise(gglr::two_plane_image(side, side), 5.0, rng);
}

void BM_BuildDag(benchmark::State& state) {
  const auto side = static_cast<gglr::Index>(state.range(0));
  const gglr::Graph g = gglr::grid_graph(side, side);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gglr::build_dag(g));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_BuildDag)->Arg(32)->Arg(64)->Arg(128);

void BM_GngApply(benchmark::State& state) {
  const auto side = static_cast<gglr::Index>(state.range(0));
  const gglr::Graph g = gglr::grid_graph(side, side);
  const gglr::DagGradientPlan plan = gglr::build_dag(g);
  const gglr::Vector x = noisy_two_plane(side);
  const auto field = gglr::gradient_field(plan, x);
  const auto gg = gglr::gradient_graph(plan, field, gglr::WeightMode::kSignalDependent,
                                       1.5, g);
  const gglr::GnlOperator op(gglr::GradientOperator::build(plan), gg.laplacian());
  gglr::Vector y(x.size());
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_GngApply)->Arg(32)->Arg(64)->Arg(128);

void BM_CgDenoise(benchmark::State& state) {
  const auto side = static_cast<gglr::Index>(state.range(0));
  const gglr::Graph g = gglr::grid_graph(side, side);
  const gglr::DagGradientPlan plan = gglr::build_dag(g);
  const gglr::Vector y = noisy_two_plane(side);
  const auto field = gglr::gradient_field(plan, y);
  const auto gg = gglr::gradient_graph(plan, field, gglr::WeightMode::kSignalDependent,
                                       1.5, g);
  const gglr::GnlOperator op(gglr::GradientOperator::build(plan), gg.laplacian());
  const gglr::LinearOperator phi = gglr::combine(
      gglr::LinearOperator::identity(y.size()), op.as_operator(), 1.0, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gglr::cg_solve(phi, y, {1e-9, 0}));
  }
}
BENCHMARK(BM_CgDenoise)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Vbc(benchmark::State& state) {
  const auto side = static_cast<gglr::Index>(state.range(0));
  const gglr::Graph g = gglr::grid_graph(side, side);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gglr::vbc(g));
  }
}
BENCHMARK(BM_Vbc)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
