#include <algorithm>
#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "risklens/error.hpp"
#include "risklens/explain.hpp"
#include "risklens/linear_model.hpp"
#include "risklens/risk.hpp"
#include "risklens/toyenvs.hpp"

using namespace risklens;

namespace {

// Graph whose representatives are given directly in normalized space, with
// identity normalization so raw queries hit them unchanged.
TransitionGraph points_graph(const std::vector<StateVector>& reps, std::vector<GraphEdge> edges) {
  const std::size_t dim = reps.front().size();
  std::vector<std::string> names;
  for (std::size_t d = 0; d < dim; ++d) names.push_back("f" + std::to_string(d));
  std::vector<GraphNode> nodes;
  for (const auto& r : reps) nodes.push_back(GraphNode{r, 1, 0});
  return TransitionGraph::from_parts(1e-6, FeatureSchema(names),
                                     Normalizer(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)),
                                     std::move(nodes), std::move(edges));
}

// Star: node 0 points at every other node.
std::vector<GraphEdge> star(std::size_t n) {
  std::vector<GraphEdge> edges;
  for (NodeId k = 1; k < n; ++k) edges.push_back({0, k, 1});
  return edges;
}

BinaryRiskLabeling labels_of(std::vector<bool> risky) {
  BinaryRiskLabeling l;
  l.risky = std::move(risky);
  return l;
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

TEST_CASE("reachable hand examples") {
  SUBCASE("isolated node") {
    const auto g = points_graph({{0.5}}, {});
    const auto s = reachable_from(g, 0, 4);
    REQUIRE(s.size() == 1);
    CHECK(s.nodes[0] == ReachedNode{0, 0});
  }
  SUBCASE("chain a->b->c with depth 1") {
    const auto g = points_graph({{0.0}, {0.5}, {1.0}}, {{0, 1, 1}, {1, 2, 1}});
    const auto s = reachable(g, std::vector<double>{0.0}, 1);
    CHECK(s.nodes == std::vector<ReachedNode>{{0, 0}, {1, 1}});
  }
  SUBCASE("depth must be positive") {
    const auto g = points_graph({{0.5}}, {});
    CHECK_THROWS_AS(reachable_from(g, 0, 0), Error);
  }
}

TEST_CASE("reachable matches all-pairs shortest hops") {
  std::mt19937_64 rng(501);
  oracle::PlainGraph plain;
  plain.n = 500;
  plain.out.resize(plain.n);
  plain.fatal.assign(plain.n, false);
  for (std::size_t v = 0; v < plain.n; ++v) {
    const int degree = static_cast<int>(rng() % 4);
    for (int k = 0; k < degree; ++k) plain.out[v].insert(static_cast<NodeId>(rng() % plain.n));
  }
  const auto g = oracle::to_transition_graph(plain, rng);
  const auto hops = oracle::all_pairs_hops(g);
  for (int q = 0; q < 50; ++q) {
    const auto origin = static_cast<NodeId>(rng() % plain.n);
    const int depth = 1 + static_cast<int>(rng() % 8);
    const auto s = reachable_from(g, origin, depth);
    std::vector<int> got(plain.n, -1);
    for (const auto& r : s.nodes) got[r.id] = r.depth;
    for (std::size_t v = 0; v < plain.n; ++v) {
      const int expected = hops[origin][v] <= depth ? hops[origin][v] : -1;
      CHECK(got[v] == expected);
    }
    // Monotone in depth.
    const auto wider = reachable_from(g, origin, depth + 1);
    for (const auto& r : s.nodes) CHECK(wider.contains(r.id));
  }
}

TEST_CASE("classification direction on hand examples") {
  SUBCASE("1-D risky half") {
    const auto g = points_graph({{0.1}, {0.3}, {0.7}, {0.9}}, star(4));
    const auto e = direction_of_risk(g, labels_of({false, false, true, true}), std::vector<double>{0.1}, 1);
    REQUIRE(e);
    const auto ref = oracle::logistic_newton({{0.1}, {0.3}, {0.7}, {0.9}}, {0, 0, 1, 1}, 1e-3);
    CHECK(e->g[0] > 0);
    CHECK(sign(e->g[0]) == sign(ref[0]));
    CHECK(e->reachable_size == 4);
    CHECK(e->risky_count == 2);
    CHECK(e->mode == SurrogateMode::kClassification);
  }
  SUBCASE("no risky node reachable") {
    const auto g = points_graph({{0.1}, {0.3}, {0.9}}, {{0, 1, 1}});
    CHECK_FALSE(direction_of_risk(g, labels_of({false, false, true}), std::vector<double>{0.1}, 5));
  }
  SUBCASE("everything reachable is risky") {
    const auto g = points_graph({{0.1}, {0.3}}, {{0, 1, 1}});
    CHECK_FALSE(direction_of_risk(g, labels_of({true, true}), std::vector<double>{0.1}, 5));
  }
  SUBCASE("mirror-symmetric dimension gets zero weight") {
    // Risky and safe nodes mirror each other in f0; f1 is identical for all.
    const auto g = points_graph({{0.5, 0.3}, {0.8, 0.3}, {0.2, 0.3}, {0.9, 0.3}, {0.1, 0.3}}, star(5));
    const auto e = direction_of_risk(g, labels_of({false, true, false, true, false}),
                                     std::vector<double>{0.5, 0.3}, 1);
    REQUIRE(e);
    CHECK(e->g[0] > 0);
    CHECK(std::abs(e->g[1]) <= 1e-9);
  }
  SUBCASE("identical inputs give identical weights") {
    const auto g = points_graph({{0.1, 0.2}, {0.3, 0.9}, {0.7, 0.1}, {0.9, 0.5}}, star(4));
    const auto labels = labels_of({false, false, true, true});
    const auto a = direction_of_risk(g, labels, std::vector<double>{0.1, 0.2}, 2);
    const auto b = direction_of_risk(g, labels, std::vector<double>{0.1, 0.2}, 2);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->g == b->g);
    CHECK(a->bias == b->bias);
  }
}

TEST_CASE("classification sign pattern on separable sets, including under scaling") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 2 + rng() % 3;
    // Separating direction with entries of clear sign.
    std::vector<double> w(dim);
    for (auto& v : w) v = (rng() % 2 ? 1.0 : -1.0) * (0.5 + unit(rng));
    std::vector<StateVector> pts;
    std::vector<int> y;
    while (pts.size() < 200) {
      StateVector p(dim);
      for (auto& v : p) v = 0.25 * unit(rng);
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += w[d] * (p[d] - 0.125);
      if (std::abs(s) < 0.0125) continue;
      pts.push_back(p);
      y.push_back(s > 0 ? 1 : 0);
    }
    // Reference signs from the fully converged oracle fit.
    const auto ref = oracle::logistic_newton(pts, y, 1e-3);
    for (double c : {1.0, 4.0}) {
      std::vector<StateVector> scaled = pts;
      for (auto& p : scaled)
        for (auto& v : p) v *= c;
      const std::vector<bool> risky(y.begin(), y.end());
      const auto g = points_graph(scaled, star(scaled.size()));
      const auto e = direction_of_risk(g, labels_of(risky), scaled[0], 1);
      REQUIRE(e);
      for (std::size_t d = 0; d < dim; ++d) CHECK(sign(e->g[d]) == sign(w[d]));
      if (c == 1.0) {
        for (std::size_t d = 0; d < dim; ++d) CHECK(sign(ref[d]) == sign(w[d]));
      }
    }
  }
}

TEST_CASE("logistic descent approaches the Newton optimum") {
  std::mt19937_64 rng(78);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<StateVector> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const double a = noise(rng), b = noise(rng);
    x.push_back({a, b});
    y.push_back(a - 0.5 * b + noise(rng) > 0 ? 1 : 0);
  }
  const auto ref = oracle::logistic_newton(x, y, 0.01);
  const auto fit = fit_logistic(x, y, LogisticOptions{0.01, 0.5, 20000});
  CHECK(fit.weights[0] == doctest::Approx(ref[0]).epsilon(1e-6));
  CHECK(fit.weights[1] == doctest::Approx(ref[1]).epsilon(1e-6));
  CHECK(fit.bias == doctest::Approx(ref[2]).epsilon(1e-6));
}

TEST_CASE("regression direction") {
  ProbabilisticRisk risk;
  SUBCASE("exact linear fit") {
    const auto g = points_graph({{0.0}, {0.5}, {1.0}}, star(3));
    risk.values = {0.0, 0.5, 1.0};
    const auto e = direction_of_risk_regression(g, risk, std::vector<double>{0.0}, 1, 0.0);
    REQUIRE(e);
    CHECK(std::abs(e->g[0] - 1.0) <= 1e-9);
    CHECK(std::abs(e->bias) <= 1e-9);
    CHECK(e->risky_count == 2);
    CHECK(e->mode == SurrogateMode::kRegression);
  }
  SUBCASE("constant target") {
    const auto g = points_graph({{0.0, 0.2}, {0.5, 0.9}, {1.0, 0.4}}, star(3));
    risk.values = {0.3, 0.3, 0.3};
    const auto e = direction_of_risk_regression(g, risk, std::vector<double>{0.0, 0.2}, 1, 0.0);
    REQUIRE(e);
    CHECK(std::abs(e->g[0]) <= 1e-9);
    CHECK(std::abs(e->g[1]) <= 1e-9);
  }
  SUBCASE("single reachable node") {
    const auto g = points_graph({{0.0}, {1.0}}, {});
    risk.values = {0.3, 0.9};
    CHECK_FALSE(direction_of_risk_regression(g, risk, std::vector<double>{0.0}, 3, 0.1));
  }
}

TEST_CASE("ridge matches the normal equations") {
  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double reg : {0.1, 0.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<StateVector> x(30, StateVector(5));
      std::vector<double> y(30);
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = unit(rng);
        y[i] = unit(rng);
      }
      const auto ref = oracle::ridge_normal_equations(x, y, reg);
      const auto fit = fit_ridge(x, y, reg);
      for (std::size_t d = 0; d < 5; ++d) CHECK(std::abs(fit.weights[d] - ref[d]) <= 1e-6);
      CHECK(std::abs(fit.bias - ref[5]) <= 1e-6);

      // The same instance through the graph path.
      const auto g = points_graph(x, star(x.size()));
      ProbabilisticRisk risk{y, 0, 0.0};
      const auto e = direction_of_risk_regression(g, risk, x[0], 1, reg);
      REQUIRE(e);
      for (std::size_t d = 0; d < 5; ++d) CHECK(std::abs(e->g[d] - ref[d]) <= 1e-6);
    }
  }
}

TEST_CASE("denormalized weights divide by the feature range") {
  const Normalizer n({0.0, 5.0, 1.0}, {2.0, 5.0, 11.0});
  const auto w = denormalize_weights(std::vector<double>{1.0, 3.0, -5.0}, n);
  CHECK(w == std::vector<double>{0.5, 0.0, -0.5});
}

TEST_CASE("distance to risk") {
  SUBCASE("hand examples") {
    const auto g = points_graph({{0.0}, {0.5}, {1.0}}, {{0, 1, 1}, {1, 2, 1}});
    const auto l = labels_of({false, false, true});
    CHECK(distance_to_risk(g, l, std::vector<double>{1.0}, 6) == DistanceToRisk{0, false});
    CHECK(distance_to_risk(g, l, std::vector<double>{0.0}, 6) == DistanceToRisk{2, false});
    CHECK(distance_to_risk(g, l, std::vector<double>{0.0}, 1) == DistanceToRisk{1, true});
    CHECK(distance_to_risk(g, labels_of({false, false, false}), std::vector<double>{0.0}, 6) ==
          DistanceToRisk{6, true});
  }
  SUBCASE("random graphs against the all-pairs oracle") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 10; ++trial) {
      const auto plain = oracle::random_plain_graph(rng, 150);
      const auto g = oracle::to_transition_graph(plain, rng);
      const auto labels = label_binary(g);
      const auto hops = oracle::all_pairs_hops(g);
      for (int q = 0; q < 10; ++q) {
        const auto origin = static_cast<NodeId>(rng() % plain.n);
        const int cap = 1 + static_cast<int>(rng() % 6);
        int best = oracle::kUnreachable;
        for (std::size_t v = 0; v < plain.n; ++v)
          if (labels.risky[v]) best = std::min(best, hops[origin][v]);
        const DistanceToRisk expected = best <= cap ? DistanceToRisk{best, false} : DistanceToRisk{cap, true};
        CHECK(distance_to_risk_from(g, labels, origin, cap) == expected);
        CHECK((distance_to_risk_from(g, labels, origin, cap).hops == 0) == static_cast<bool>(labels.risky[origin]));
      }
    }
  }
}

TEST_CASE("trace_episode") {
  const auto g = points_graph({{0.0}, {0.5}, {1.0}}, {{0, 1, 1}, {1, 2, 1}});
  AnnotatedGraph model{g, labels_of({false, false, true}), std::nullopt};
  SUBCASE("single risky state") {
    const std::vector<StateVector> ep{{1.0}};
    const auto t = trace_episode(model, ep, TraceOptions{});
    REQUIRE(t.size() == 1);
    CHECK(t.steps[0].distance == DistanceToRisk{0, false});
    CHECK_FALSE(t.steps[0].g);
  }
  SUBCASE("order and length are preserved") {
    const std::vector<StateVector> ep{{0.0}, {0.5}, {1.0}, {0.5}, {0.0}};
    TraceOptions opts;
    opts.depth = 1;
    const auto t = trace_episode(model, ep, opts);
    REQUIRE(t.size() == 5);
    const int expected[] = {2, 1, 0, 1, 2};
    for (std::size_t i = 0; i < 5; ++i) CHECK(t.steps[i].distance.hops == expected[i]);
    CHECK_FALSE(t.steps[0].g);  // only safe nodes within one hop
    REQUIRE(t.steps[1].g);
    CHECK((*t.steps[1].g)[0] > 0);
    CHECK(t.features == std::vector<std::string>{"f0"});
  }
  SUBCASE("regression mode needs probabilistic values") {
    TraceOptions opts;
    opts.mode = TraceMode::kRegression;
    const std::vector<StateVector> ep{{0.0}};
    CHECK_THROWS_AS(trace_episode(model, ep, opts), Error);
  }
}

TEST_CASE("straight corridor walk approaches lava one hop per step") {
  const GridMap map = GridMap::load(RISKLENS_DATA_DIR "/maps/straight_corridor.txt");
  const auto log = grid_generate(map, 300, 200, 5);
  const auto graph = TransitionGraph::build(log, 0.01);
  AnnotatedGraph model{graph, label_binary(graph), std::nullopt};

  const std::vector<GridAction> script(4, GridAction::kForward);
  const Episode walk = grid_rollout(map, script);
  std::vector<StateVector> states;
  for (const auto& r : walk.records) states.push_back(r.state);
  TraceOptions opts;
  opts.mode = TraceMode::kDistanceOnly;
  const auto t = trace_episode(model, states, opts);
  REQUIRE(t.size() == 5);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.steps[i].distance == DistanceToRisk{static_cast<int>(4 - i), false});
  }
}
