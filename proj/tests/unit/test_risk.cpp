#include <algorithm>
#include <numeric>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "risklens/error.hpp"
#include "risklens/risk.hpp"

using namespace risklens;

namespace {

TransitionGraph graph_of(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges) {
  return TransitionGraph::from_parts(0.01, FeatureSchema({"f"}), Normalizer({0}, {1}), std::move(nodes),
                                     std::move(edges));
}

GraphNode node(std::uint64_t total, std::uint64_t fatal, double x = 0.0) { return GraphNode{{x}, total, fatal}; }

}  // namespace

TEST_CASE("binary labeling on hand examples") {
  SUBCASE("single fatal node") {
    CHECK(label_binary(graph_of({node(1, 1)}, {})).risky == std::vector<bool>{true});
  }
  SUBCASE("chain a->b->c with fatal c") {
    const auto g = graph_of({node(1, 0), node(1, 0), node(1, 1)}, {{0, 1, 1}, {1, 2, 1}});
    CHECK(label_binary(g).risky == std::vector<bool>{true, true, true});
  }
  SUBCASE("escape to a safe dead end") {
    // a=0 -> c=1 (fatal), a -> d=2 (dead end)
    const auto g = graph_of({node(1, 0), node(1, 1), node(1, 0)}, {{0, 1, 1}, {0, 2, 1}});
    CHECK(label_binary(g).risky == std::vector<bool>{false, true, false});
    // Vacuous reading: the dead end becomes risky, and so does a.
    CHECK(label_binary(g, DeadEndPolicy::kRisky).risky == std::vector<bool>{true, true, true});
  }
  SUBCASE("self-loop keeps a node safe") {
    const auto g = graph_of({node(1, 0), node(1, 1)}, {{0, 0, 3}, {0, 1, 1}});
    CHECK(label_binary(g).risky == std::vector<bool>{false, true});
  }
}

TEST_CASE("worklist labeling equals the naive fixpoint on random graphs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto plain = oracle::random_plain_graph(rng, 200);
    const auto g = oracle::to_transition_graph(plain, rng);
    CHECK(label_binary(g, DeadEndPolicy::kSafe).risky == oracle::naive_fixpoint(plain, false));
    CHECK(label_binary(g, DeadEndPolicy::kRisky).risky == oracle::naive_fixpoint(plain, true));
  }
}

TEST_CASE("adding a fatal flag only grows the risky set") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    auto plain = oracle::random_plain_graph(rng, 100);
    std::mt19937_64 rebuild(trial);
    const auto before = label_binary(oracle::to_transition_graph(plain, rebuild)).risky;
    plain.fatal[rng() % plain.n] = true;
    std::mt19937_64 rebuild2(trial);
    const auto after = label_binary(oracle::to_transition_graph(plain, rebuild2)).risky;
    for (std::size_t v = 0; v < plain.n; ++v) {
      if (before[v]) CHECK(after[v]);
    }
  }
}

TEST_CASE("risk_init follows the fatal fraction formula") {
  const auto g = graph_of({node(2, 1), node(10, 0), node(1, 1), node(4, 3)}, {});
  const auto r = risk_init(g);
  CHECK(r.values[0] == 0.75);
  CHECK(r.values[1] == 0.0);
  CHECK(r.values[2] == 1.0);
  CHECK(r.values[3] == 0.5 + 3.0 / 8.0);
  CHECK(r.iterations == 0);
}

TEST_CASE("risk_iterate hand examples") {
  SUBCASE("two-node chain") {
    // s=0 -> k=1, k fatal with s_fatal/s_total = 1/2.
    const auto g = graph_of({node(1, 0), node(2, 1)}, {{0, 1, 1}});
    const auto r0 = risk_init(g);
    REQUIRE(r0.values == std::vector<double>{0.0, 0.75});
    const auto r1 = risk_iterate(g, r0, 0.01, 1);
    CHECK(std::abs(r1.values[0] - 0.0075) <= 1e-12);
    CHECK(r1.values[1] == 0.75);
    CHECK(r1.iterations == 1);
    CHECK(r1.learning_rate == 0.01);
  }
  SUBCASE("zero second term") {
    const auto g = graph_of({node(2, 1), node(1, 0), node(1, 0)}, {{0, 1, 1}, {0, 2, 1}});
    const auto r0 = risk_init(g);
    const auto r1 = risk_iterate(g, r0, 0.2, 1);
    CHECK(r1.values[0] == doctest::Approx((1 - 0.2) * r0.values[0]).epsilon(1e-15));
  }
  SUBCASE("multiplicities weight the mean of squares") {
    // s -> a (V=3, R=0.6), s -> b (V=1, R=1.0)
    const auto g = graph_of({node(1, 0), node(1, 0), node(1, 0)}, {{0, 1, 3}, {0, 2, 1}});
    ProbabilisticRisk r{{0.1, 0.6, 1.0}, 0, 0.0};
    const auto r1 = risk_iterate(g, r, 0.5, 1);
    const double expected = 0.5 * 0.1 + 0.5 * std::sqrt((0.36 * 3 + 1.0) / 4.0);
    CHECK(r1.values[0] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("risk_iterate bounds, identity and errors") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const auto plain = oracle::random_plain_graph(rng, 150);
    const auto g = oracle::to_transition_graph(plain, rng);
    auto r = risk_init(g);
    CHECK(risk_iterate(g, r, 0.3, 0) == r);
    const double l = 0.01 + 0.98 * static_cast<double>(rng() % 1000) / 1000.0;
    for (int it = 0; it < 50; ++it) {
      r = risk_iterate(g, r, l, 1);
      for (double v : r.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  const auto g = graph_of({node(1, 0)}, {});
  CHECK_THROWS_AS(risk_iterate(g, risk_init(g), 0.0, 1), Error);
  CHECK_THROWS_AS(risk_iterate(g, risk_init(g), 1.0, 1), Error);
  CHECK_THROWS_AS(risk_iterate(g, risk_init(g), 0.5, -1), Error);
}

TEST_CASE("risk_iterate is invariant under node relabeling") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const auto plain = oracle::random_plain_graph(rng, 120);
    std::vector<NodeId> perm(plain.n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<GraphNode> nodes(plain.n), permuted_nodes(plain.n);
    std::vector<GraphEdge> edges, permuted_edges;
    for (std::size_t v = 0; v < plain.n; ++v) {
      nodes[v] = node(2 + rng() % 3, plain.fatal[v] ? 1 : 0);
      permuted_nodes[perm[v]] = nodes[v];
      for (NodeId k : plain.out[v]) {
        const std::uint64_t m = 1 + rng() % 4;
        edges.push_back({static_cast<NodeId>(v), k, m});
        permuted_edges.push_back({perm[v], perm[k], m});
      }
    }
    const auto g = graph_of(nodes, edges);
    const auto h = graph_of(permuted_nodes, permuted_edges);
    const auto rg = risk_iterate(g, risk_init(g), 0.05, 50);
    const auto rh = risk_iterate(h, risk_init(h), 0.05, 50);
    for (std::size_t v = 0; v < plain.n; ++v) {
      CHECK(std::abs(rg.values[v] - rh.values[perm[v]]) <= 1e-12);
    }
  }
}
