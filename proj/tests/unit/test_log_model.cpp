#include <random>
#include <sstream>

#include "doctest.h"
#include "risklens/error.hpp"
#include "risklens/log_model.hpp"
#include "risklens/toyenvs.hpp"

using namespace risklens;

namespace {

const FeatureSchema kXY({"x", "y"});

ErrorCode parse_error_code(const std::string& text, std::size_t* line = nullptr) {
  std::istringstream in(text);
  try {
    parse_log(in, kXY);
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.code();
  }
  FAIL("expected parse to throw");
  return ErrorCode::kIo;
}

TransitionLog random_log(std::mt19937_64& rng) {
  std::vector<Episode> episodes;
  const int n_ep = 1 + static_cast<int>(rng() % 5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int e = 0; e < n_ep; ++e) {
    Episode ep{"ep" + std::to_string(e), {}};
    const int len = 1 + static_cast<int>(rng() % 20);
    for (int t = 0; t < len; ++t) {
      const bool last = t == len - 1;
      const bool terminal = last && rng() % 2 == 0;
      const bool fatal = terminal && rng() % 2 == 0;
      ep.records.push_back({ep.id, static_cast<std::uint64_t>(t), {u(rng), u(rng)}, fatal, terminal});
    }
    episodes.push_back(std::move(ep));
  }
  return TransitionLog(kXY, std::move(episodes));
}

}  // namespace

TEST_CASE("schema rejects duplicates and empty names") {
  CHECK_THROWS_AS(FeatureSchema({"a", "a"}), Error);
  CHECK_THROWS_AS(FeatureSchema({"a", ""}), Error);
  CHECK_THROWS_AS(FeatureSchema(std::vector<std::string>{}), Error);
  CHECK(FeatureSchema({"a", "b"}).dim() == 2);
}

TEST_CASE("two-line file with one two-step episode") {
  std::istringstream in(
      R"({"episode":"e","step":0,"state":[0,1],"fatal":false,"terminal":false})"
      "\n"
      R"({"episode":"e","step":1,"state":[2,3],"fatal":true,"terminal":true})"
      "\n");
  const TransitionLog log = parse_log(in, kXY);
  REQUIRE(log.episodes().size() == 1);
  CHECK(log.episodes()[0].records.size() == 2);
  CHECK(log.record_count() == 2);
  CHECK(log.transition_count() == 1);
  CHECK(log.fatal_count() == 1);
  CHECK(log.episodes()[0].records[1].state == StateVector{2, 3});
}

TEST_CASE("ingestion errors carry the offending line") {
  const std::string ok = R"({"episode":"e","step":0,"state":[0,1],"fatal":false,"terminal":false})";
  std::size_t line = 0;

  CHECK(parse_error_code(ok + "\n" + R"({"episode":"e","step":1,"state":[0,1,2],"fatal":false,"terminal":false})",
                         &line) == ErrorCode::kDimensionMismatch);
  CHECK(line == 2);

  CHECK(parse_error_code(ok + "\n{not json", &line) == ErrorCode::kParse);
  CHECK(line == 2);

  CHECK(parse_error_code(ok + "\n" + R"({"episode":"e","step":2,"state":[0,1],"fatal":false,"terminal":false})") ==
        ErrorCode::kNonConsecutiveStep);
  CHECK(parse_error_code(R"({"episode":"e","step":1,"state":[0,1],"fatal":false,"terminal":false})") ==
        ErrorCode::kNonConsecutiveStep);

  const std::string term = R"({"episode":"e","step":0,"state":[0,1],"fatal":false,"terminal":true})";
  CHECK(parse_error_code(term + "\n" + R"({"episode":"e","step":1,"state":[0,1],"fatal":false,"terminal":false})",
                         &line) == ErrorCode::kRecordAfterTerminal);
  CHECK(line == 2);

  CHECK(parse_error_code(R"({"episode":"e","step":0,"state":[0,1],"fatal":true,"terminal":false})") ==
        ErrorCode::kInvalidArgument);
  CHECK(parse_error_code(R"({"episode":"e","step":0,"state":[0,"a"],"fatal":false,"terminal":false})") ==
        ErrorCode::kParse);
  CHECK(parse_error_code(R"({"episode":"e","step":-1,"state":[0,1],"fatal":false,"terminal":false})") ==
        ErrorCode::kParse);
  CHECK(parse_error_code(R"({"episode":"e","step":0,"state":[0,1],"terminal":false})") == ErrorCode::kParse);
}

TEST_CASE("interleaved episodes keep per-episode order") {
  std::istringstream in(
      R"({"episode":"a","step":0,"state":[0,0],"fatal":false,"terminal":false})"
      "\n"
      R"({"episode":"b","step":0,"state":[5,5],"fatal":false,"terminal":false})"
      "\n\n"
      R"({"episode":"a","step":1,"state":[1,1],"fatal":false,"terminal":false})"
      "\n");
  const TransitionLog log = parse_log(in, kXY);
  REQUIRE(log.episodes().size() == 2);
  CHECK(log.episodes()[0].id == "a");
  CHECK(log.episodes()[0].records[1].state == StateVector{1, 1});
  CHECK(log.episodes()[1].id == "b");
}

TEST_CASE("emit then parse reproduces random logs exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const TransitionLog log = random_log(rng);
    std::stringstream buffer;
    emit_log(buffer, log);
    CHECK(parse_log(buffer, kXY) == log);
  }
}

TEST_CASE("gridworld output passes ingestion") {
  const GridMap map = GridMap::parse("#####\n#S.L#\n#####\n");
  const TransitionLog log = grid_generate(map, 1000, 30, 3);
  std::stringstream buffer;
  emit_log(buffer, log);
  const TransitionLog back = parse_log(buffer, grid_schema());
  CHECK(back.episodes().size() == 1000);
  for (const auto& ep : back.episodes())
    for (const auto& r : ep.records)
      if (r.fatal) CHECK(r.terminal);
}

TEST_CASE("normalizer bounds and degenerate dimensions") {
  auto make = [](std::vector<StateVector> states) {
    Episode ep{"e", {}};
    for (std::size_t i = 0; i < states.size(); ++i) ep.records.push_back({"e", i, states[i], false, false});
    return TransitionLog(kXY, {ep});
  };

  const Normalizer n = fit_normalizer(make({{0, 0}, {2, 4}}));
  CHECK(n.lower() == std::vector<double>{0, 0});
  CHECK(n.upper() == std::vector<double>{2, 4});
  CHECK(n.normalize(StateVector{1, 2}) == StateVector{0.5, 0.5});

  const Normalizer constant = fit_normalizer(make({{5, 0}, {5, 1}}));
  CHECK(constant.normalize(StateVector{5, 1})[0] == 0.0);
  CHECK(constant.normalize(StateVector{-7, 1})[0] == 0.0);

  const Normalizer single = fit_normalizer(make({{3, 3}}));
  CHECK(single.normalize(StateVector{3, 3}) == StateVector{0, 0});

  CHECK_THROWS_AS(fit_normalizer(TransitionLog(kXY, {})), Error);
  CHECK_THROWS_AS(n.normalize(StateVector{1}), Error);
}

TEST_CASE("normalized logged states lie in [0,1] and round-trip") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const TransitionLog log = random_log(rng);
    const Normalizer n = fit_normalizer(log);
    for (const auto& ep : log.episodes()) {
      for (const auto& r : ep.records) {
        const auto z = n.normalize(r.state);
        const auto back = n.denormalize(z);
        for (std::size_t d = 0; d < z.size(); ++d) {
          CHECK(z[d] >= 0.0);
          CHECK(z[d] <= 1.0);
          if (n.range(d) > 0) CHECK(back[d] == doctest::Approx(r.state[d]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("query states outside the bounds are clamped and flagged") {
  const Normalizer n({0, 0}, {1, 2});
  const auto inside = n.normalize_clamped(StateVector{0.5, 1});
  CHECK_FALSE(inside.clamped);
  const auto outside = n.normalize_clamped(StateVector{-1, 5});
  CHECK(outside.clamped);
  CHECK(outside.values == StateVector{0, 1});
}
