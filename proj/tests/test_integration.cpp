#include <cmath>

#include <doctest.h>

#include "itree/base_infer.hpp"
#include "itree/integration.hpp"
#include "support/oracles.hpp"

using namespace itree;

namespace {

RunResult wf_run(double w, double f, std::vector<double> z) {
  RunResult r;
  r.amalg_log_w = w > 0.0 ? std::log(w) : neg_inf;
  r.f_value = f;
  r.rep_z = z;
  r.samples.push_back({std::move(z), 1.0});
  r.evals = 1;
  return r;
}

}  // namespace

TEST_CASE("s_hat") {
  IntegrationParams p;
  SUBCASE("weighted integrand {1,3}") {
    Tree tree(1);
    tree.add_run(0, wf_run(1.0, 1.0, {0.1}));
    tree.add_run(0, wf_run(3.0, 1.0, {0.9}));
    tree.recompute_all(p.propagation(), 100.0);
    CHECK(s_hat(tree.root().stats) == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("zero integrand kills the spread") {
    Tree tree(1);
    tree.add_run(0, wf_run(1.0, 0.0, {0.1}));
    tree.add_run(0, wf_run(3.0, 0.0, {0.9}));
    tree.recompute_all(p.propagation(), 100.0);
    CHECK(log_s_hat(tree.root().stats) == neg_inf);
  }
  SUBCASE("unit integrand matches the weight deviation") {
    RngStream rng(61);
    auto tree = oracles::random_tree(rng, 2, 10);
    for (std::size_t i = 0; i < tree.size(); ++i)
      for (auto& run : tree.node(int(i)).runs) run.f_value = 1.0;
    tree.recompute_all(p.propagation(), 50.0);
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const auto& s = tree.node(int(i)).stats;
      if (s.log_sigma2 == pos_inf) {
        CHECK(log_s_hat(s) == pos_inf);
      } else {
        CHECK(log_s_hat(s) == doctest::Approx(0.5 * s.log_sigma2));
      }
    }
  }
  SUBCASE("single run is maximally uncertain") {
    Tree tree(1);
    tree.add_run(0, wf_run(1.0, 1.0, {0.5}));
    tree.recompute_all(p.propagation(), 0.0);
    CHECK(log_s_hat(tree.root().stats) == pos_inf);
  }
}

TEST_CASE("s_hat flattening identity") {
  RngStream rng(62);
  IntegrationParams p;
  for (int rep = 0; rep < 30; ++rep) {
    auto tree = oracles::random_tree(rng, 2, 15);
    tree.recompute_all(p.propagation(), 50.0);
    for (std::size_t id = 0; id < tree.size(); ++id) {
      auto oracle = oracles::flatten_oracle(tree, int(id));
      const auto& s = tree.node(int(id)).stats;
      if (oracle.s2 == pos_inf) {
        CHECK(log_s_hat(s) == pos_inf);
      } else {
        double got = log_s_hat(s) == neg_inf ? 0.0
                                             : std::exp(2.0 * log_s_hat(s));
        CHECK(got == doctest::Approx(oracle.s2).epsilon(1e-9).scale(1.0));
      }
      double omega_f = s.log_omega_f == neg_inf ? 0.0 : std::exp(s.log_omega_f);
      CHECK(omega_f == doctest::Approx(oracle.omega_f).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("utility_integration") {
  IntegrationParams p;
  p.beta = 0.0;
  TreeNode parent, left, right;
  parent.traversals = 20;
  parent.rect = HyperRect::unit(1);
  left.traversals = 10;
  left.rect = HyperRect({0.0}, {0.5});
  right.traversals = 10;
  right.rect = HyperRect({0.5}, {1.0});
  parent.stats.log_s2 = std::log(4.0);   // s_pa = 2
  left.stats.log_s2 = std::log(1.0);     // s_l = 1
  right.stats.log_s2 = std::log(0.25);   // s_r = 0.5

  SUBCASE("alpha = beta = 0 reduces to the deviation ratio over M") {
    CHECK(utility_integration(left, parent, p, 0.5) ==
          doctest::Approx(0.5 / 10.0));
    CHECK(utility_integration(right, parent, p, 0.5) ==
          doctest::Approx(0.25 / 10.0));
  }
  SUBCASE("alpha = 1 flattens exploitation") {
    p.alpha_schedule = [](double) { return 1.0; };
    CHECK(utility_integration(left, parent, p, 0.5) ==
          doctest::Approx(utility_integration(right, parent, p, 0.5)));
  }
  SUBCASE("degenerate parent deviation yields ratio 1") {
    parent.stats.log_s2 = neg_inf;
    CHECK(utility_integration(left, parent, p, 0.5) ==
          doctest::Approx(1.0 / 10.0));
  }
  SUBCASE("under-visited child ranks first") {
    left.stats.log_s2 = pos_inf;
    CHECK(utility_integration(left, parent, p, 0.5) == pos_inf);
  }
  SUBCASE("optimism boost and its cutoff") {
    p.beta = 0.1;
    double boost = 0.1 * 0.5 * std::log(20.0) / std::sqrt(10.0);
    CHECK(utility_integration(left, parent, p, 0.0) ==
          doctest::Approx((0.5 + boost) / 10.0));
    CHECK(utility_integration(left, parent, p, 0.75) ==
          doctest::Approx(0.5 / 10.0));
  }
}

TEST_CASE("select_leaf_integration prefers the high-deviation child") {
  IntegrationParams p;
  p.beta = 0.0;
  RngStream rng(63);
  Tree tree(1);
  auto [l, r] = tree.attach_children(0, HyperRect({0.0}, {0.5}),
                                     HyperRect({0.5}, {1.0}));
  for (int i = 0; i < 4; ++i) {
    // left: volatile w*f, right: constant
    tree.add_run(l, wf_run(1.0 + 2.0 * (i % 2), 1.0, {0.2}));
    tree.add_run(r, wf_run(1.0, 1.0, {0.8}));
  }
  tree.recompute_all(p.propagation(), 10.0);
  auto path = select_leaf_integration(tree, p, 0.5, rng);
  CHECK(path.back() == l);
}

TEST_CASE("estimate_integral") {
  IntegrationParams p;
  SUBCASE("unit integrand integrates to one") {
    RngStream rng(64);
    auto tree = oracles::random_tree(rng, 1, 10);
    for (std::size_t i = 0; i < tree.size(); ++i)
      for (auto& run : tree.node(int(i)).runs) run.f_value = 1.0;
    tree.recompute_all(p.propagation(), 50.0);
    CHECK(tree.estimate_integral() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("single leaf reduces to the weighted mean") {
    Tree tree(1);
    tree.add_run(0, wf_run(1.0, 0.0, {0.2}));
    tree.add_run(0, wf_run(3.0, 1.0, {0.8}));
    tree.recompute_all(p.propagation(), 10.0);
    CHECK(tree.estimate_integral() == doctest::Approx(0.75));
  }
  SUBCASE("matches the flattening oracle on random trees") {
    RngStream rng(65);
    for (int rep = 0; rep < 20; ++rep) {
      auto tree = oracles::random_tree(rng, 2, 12);
      tree.recompute_all(p.propagation(), 50.0);
      auto oracle = oracles::flatten_oracle(tree, 0);
      if (oracle.omega <= 0.0) continue;
      CHECK(tree.estimate_integral() ==
            doctest::Approx(oracle.omega_f / oracle.omega).epsilon(1e-10));
    }
  }
  SUBCASE("half-space indicator under a uniform target") {
    class HalfSpace final : public TargetModel {
     public:
      std::size_t dim() const override { return 1; }
      std::vector<double> to_params(const std::vector<double>& z) const override {
        return z;
      }
      double log_ratio(const std::vector<double>&) const override { return 0.0; }
      bool has_integrand() const override { return true; }
      double integrand(const std::vector<double>& x) const override {
        return x[0] > 0.3 ? 1.0 : 0.0;
      }
    };
    HalfSpace model;
    RngStream rng(66);
    const int reps = 400;
    double acc = 0.0, acc2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Tree tree(1);
      for (int i = 0; i < 4; ++i)
        tree.add_run(0, is_run(model, HyperRect::unit(1), 32, rng));
      tree.recompute_all(p.propagation(), tree.max_volume_free_log_w());
      double est = tree.estimate_integral();
      acc += est;
      acc2 += est * est;
    }
    double mean = acc / reps;
    double se = std::sqrt((acc2 / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 0.7) < 3.0 * se + 1e-9);
  }
}
