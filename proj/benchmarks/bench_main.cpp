#include <map>

#include <benchmark/benchmark.h>

#include "qiniup/lasso.hpp"
#include "qiniup/lhs.hpp"
#include "qiniup/metrics.hpp"
#include "qiniup/random.hpp"
#include "qiniup/synthetic.hpp"

namespace {

const qiniup::UpliftDataset& population(std::size_t n) {
  static std::map<std::size_t, qiniup::UpliftDataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    qiniup::BasePopulationConfig cfg;
    cfg.n = n;
    it = cache.emplace(n, qiniup::generate_base_population(cfg)).first;
  }
  return it->second;
}

void BM_MetricEvaluator(benchmark::State& state) {
  const auto& ds = population(static_cast<std::size_t>(state.range(0)));
  qiniup::MetricEvaluator ev(ds, 10);
  qiniup::Rng rng = qiniup::make_rng(qiniup::RandomSeed{1});
  std::vector<double> pred(ds.n());
  for (auto& v : pred) v = qiniup::standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ev.try_scores(pred));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.n()));
}
BENCHMARK(BM_MetricEvaluator)->Arg(2000)->Arg(20000);

void BM_LassoPath(benchmark::State& state) {
  const auto& ds = population(static_cast<std::size_t>(state.range(0)));
  qiniup::PathOptions opt;
  opt.length = 100;
  for (auto _ : state) benchmark::DoNotOptimize(qiniup::fit_lasso_path(ds, opt));
}
BENCHMARK(BM_LassoPath)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LhsSearch(benchmark::State& state) {
  const auto& ds = population(2000);
  qiniup::PathOptions popt;
  popt.length = 20;
  const auto path = qiniup::fit_lasso_path(ds, popt);
  qiniup::LhsConfig cfg;
  cfg.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(qiniup::lhs_search_all(path, ds, 10, cfg));
}
BENCHMARK(BM_LhsSearch)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
