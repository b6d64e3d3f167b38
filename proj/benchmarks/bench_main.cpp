#include <benchmark/benchmark.h>

#include "anchormc/allocation.hpp"
#include "anchormc/consensus.hpp"
#include "anchormc/dpm.hpp"
#include "anchormc/estimation.hpp"
#include "anchormc/fa.hpp"
#include "anchormc/simgen.hpp"

using namespace anchormc;

namespace {

static void BM_AnchorDistance(benchmark::State& state) {
  Rng rng(1);
  IdSet anchors, fa, fb;
  for (ObsId id = 1; id <= state.range(0); ++id) {
    anchors.push_back(id);
    if (rng.bernoulli(0.3)) fa.push_back(id);
    if (rng.bernoulli(0.3)) fb.push_back(id);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor_distance(fa, fb, anchors));
  }
}
BENCHMARK(BM_AnchorDistance)->Arg(100)->Arg(1000);

static void BM_DpmIteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Sim1Truth sim = gen_sim1(n, 7);
  DpmConfig cfg;
  cfg.iterations = 10;
  cfg.burnin = 5;
  cfg.thin = 1;
  DpmChain chain(sim.data.y, sim.data.ids, cfg);
  for (auto _ : state) {
    chain.step();
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DpmIteration)->Arg(200)->Arg(800);

static void BM_FaIteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Sim2Truth sim = gen_sim2(3, n, 5);
  FaConfig cfg;
  cfg.iterations = 10;
  cfg.burnin = 5;
  cfg.thin = 1;
  FaChain chain(sim.data, cfg);
  for (int warm = 0; warm < 20; ++warm) chain.step();
  for (auto _ : state) {
    chain.step();
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FaIteration)->Arg(160)->Arg(800);

static void BM_MergeDraws(benchmark::State& state) {
  const int shards = 4, clusters = 6;
  Rng rng(5);
  IdSet anchors;
  for (ObsId id = 1; id <= 100; ++id) anchors.push_back(id);
  std::vector<SubsetDraw> draws(shards);
  for (int s = 0; s < shards; ++s) {
    draws[s].kind = SubsetKind::Feature;
    for (int k = 0; k < clusters; ++k) {
      IdSet f;
      for (ObsId id = 1; id <= 100; ++id) {
        if (rng.bernoulli(0.2)) f.push_back(id);
      }
      for (int extra = 0; extra < 25; ++extra) {
        f.push_back(static_cast<ObsId>(1000 + s * 100 + k * 30 + extra));
      }
      std::sort(f.begin(), f.end());
      draws[s].subsets.push_back(std::move(f));
      draws[s].params.push_back(FaSubsetParams{Eigen::VectorXd::Ones(5)});
    }
  }
  MergeConfig cfg;
  cfg.epsilon = 0.1;
  cfg.anchor_ids = anchors;
  std::vector<std::pair<int, const SubsetDraw*>> labeled;
  for (int s = 0; s < shards; ++s) labeled.emplace_back(s + 1, &draws[s]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(merge_draws(labeled, cfg, SubsetKind::Feature, 1));
  }
}
BENCHMARK(BM_MergeDraws);

static void BM_Nmi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(9);
  std::vector<int> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform_int(0, 9);
    b[i] = rng.uniform_int(0, 9);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(nmi(a, b));
  }
}
BENCHMARK(BM_Nmi)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
