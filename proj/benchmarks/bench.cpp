#include <benchmark/benchmark.h>

#include "itree/base_infer.hpp"
#include "itree/models/toy.hpp"
#include "itree/traversal.hpp"
#include "itree/tree.hpp"

namespace {

using namespace itree;

RunResult synthetic_run(RngStream& rng, std::size_t dim) {
  RunResult r;
  r.amalg_log_w = rng.normal();
  r.rep_z.resize(dim);
  for (auto& v : r.rep_z) v = rng.uniform();
  r.samples.push_back({r.rep_z, 1.0});
  r.evals = 1;
  return r;
}

// balanced tree with `depth` levels and `runs_per_node` runs everywhere
Tree build_tree(int depth, std::size_t runs_per_node, RngStream& rng) {
  Tree tree(2);
  std::vector<int> frontier{0};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int id : frontier) {
      const HyperRect& r = tree.node(id).rect;
      double mid = 0.5 * (r.lo[0] + r.hi[0]);
      auto [l, rr] = tree.attach_children(id, split_rect(r, 0, mid).first,
                                          split_rect(r, 0, mid).second);
      next.push_back(l);
      next.push_back(rr);
    }
    frontier = std::move(next);
  }
  for (std::size_t i = 0; i < tree.size(); ++i)
    for (std::size_t k = 0; k < runs_per_node; ++k)
      tree.add_run(int(i), synthetic_run(rng, 2));
  return tree;
}

void BM_recompute_all(benchmark::State& state) {
  RngStream rng(7);
  Tree tree = build_tree(int(state.range(0)), 8, rng);
  PropagationParams p;
  for (auto _ : state) {
    tree.recompute_all(p, 0.0);
    benchmark::DoNotOptimize(tree.log_ml());
  }
}
BENCHMARK(BM_recompute_all)->Arg(4)->Arg(7)->Arg(10);

void BM_propagate_leaf(benchmark::State& state) {
  RngStream rng(7);
  Tree tree = build_tree(int(state.range(0)), 8, rng);
  PropagationParams p;
  tree.recompute_all(p, 0.0);
  int leaf = tree.leaf_ids().back();
  for (auto _ : state) {
    tree.propagate_from(leaf, p, 0.0);
    benchmark::DoNotOptimize(tree.log_ml());
  }
}
BENCHMARK(BM_propagate_leaf)->Arg(4)->Arg(7)->Arg(10);

void BM_select_leaf(benchmark::State& state) {
  RngStream rng(7);
  Tree tree = build_tree(int(state.range(0)), 8, rng);
  TraversalParams tp;
  tree.recompute_all(tp.propagation(), 0.0);
  for (auto _ : state) {
    auto path = select_leaf(tree, tp, 0.3, rng);
    benchmark::DoNotOptimize(path.back());
  }
}
BENCHMARK(BM_select_leaf)->Arg(4)->Arg(7)->Arg(10);

void BM_is_run(benchmark::State& state) {
  models::ConjugateGaussian1D model(1.0, 1.0);
  HyperRect rect = HyperRect::unit(1);
  RngStream rng(11);
  for (auto _ : state) {
    auto r = is_run(model, rect, std::size_t(state.range(0)), rng);
    benchmark::DoNotOptimize(r.amalg_log_w);
  }
}
BENCHMARK(BM_is_run)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
