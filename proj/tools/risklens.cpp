// risklens: build transition graphs from interaction logs, label risk and
// explain it.
//
// Every failure prints one JSON line {"error": {...}} on stderr and exits
// with status 1; usage errors exit with CLI11's status.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "risklens/baseline_perturb.hpp"
#include "risklens/error.hpp"
#include "risklens/explain.hpp"
#include "risklens/log_model.hpp"
#include "risklens/report.hpp"
#include "risklens/risk.hpp"
#include "risklens/toyenvs.hpp"
#include "risklens/transition_graph.hpp"

namespace {

using json = nlohmann::json;
using namespace risklens;

std::vector<double> parse_state(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "cannot parse state component '" + cell + "'");
    }
  }
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "state is empty");
  return values;
}

void emit_json(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + out_path);
  out << text;
}

std::string default_schema_path(const std::string& log_path) { return log_path + ".schema.json"; }

json explanation_json(const std::optional<Explanation>& e, const TransitionGraph* graph,
                      const std::vector<std::string>& features, bool denormalize) {
  if (!e) return json{{"no_direction", true}};
  json doc{{"features", features},
           {"mode", e->mode == SurrogateMode::kClassification ? "classification" : "regression"},
           {"reachable_size", e->reachable_size},
           {"risky_count", e->risky_count}};
  if (graph) {
    doc["origin"] = e->origin;
    doc["query_clamped"] = e->query_clamped;
  }
  if (denormalize && graph) {
    const Normalizer& norm = graph->normalizer();
    const auto g = denormalize_weights(e->g, norm);
    double bias = e->bias;
    for (std::size_t d = 0; d < g.size(); ++d) bias -= g[d] * norm.lower()[d];
    doc["g"] = g;
    doc["bias"] = bias;
    doc["units"] = "raw";
  } else {
    doc["g"] = e->g;
    doc["bias"] = e->bias;
    doc["units"] = graph ? "normalized" : "raw";
  }
  return doc;
}

std::vector<StateVector> load_episode(const std::string& path, const FeatureSchema& schema,
                                      const std::string& episode_id) {
  const TransitionLog log = ingest(path, schema);
  for (const auto& ep : log.episodes()) {
    if (episode_id.empty() || ep.id == episode_id) {
      std::vector<StateVector> states;
      for (const auto& r : ep.records) states.push_back(r.state);
      return states;
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              episode_id.empty() ? "episode file is empty" : "episode '" + episode_id + "' not found");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risklens: transition-graph risk explanations for sequential decision logs"};
  app.require_subcommand(1);

  // gen-grid
  std::string map_path, out_path, schema_out;
  int episodes = 1000, max_steps = 200;
  std::uint64_t seed = 0;
  auto* gen_grid = app.add_subcommand("gen-grid", "Generate a random-agent log on a lava grid map");
  gen_grid->add_option("--map", map_path, "ASCII map file")->required()->check(CLI::ExistingFile);
  gen_grid->add_option("--episodes", episodes, "Number of episodes")->check(CLI::NonNegativeNumber);
  gen_grid->add_option("--max-steps", max_steps, "Maximum records per episode")->check(CLI::PositiveNumber);
  gen_grid->add_option("--seed", seed, "Random seed");
  gen_grid->add_option("--out", out_path, "Output log (JSONL)")->required();
  gen_grid->add_option("--schema-out", schema_out, "Schema output (default: <out>.schema.json)");

  auto* gen_cliff = app.add_subcommand("gen-cliff", "Generate a continuous cliff-world log");
  gen_cliff->add_option("--episodes", episodes, "Number of episodes")->check(CLI::NonNegativeNumber);
  gen_cliff->add_option("--max-steps", max_steps, "Maximum records per episode")->check(CLI::PositiveNumber);
  gen_cliff->add_option("--seed", seed, "Random seed");
  gen_cliff->add_option("--out", out_path, "Output log (JSONL)")->required();
  gen_cliff->add_option("--schema-out", schema_out, "Schema output (default: <out>.schema.json)");

  // build-graph
  std::string log_path, schema_path, metric = "euclidean";
  double epsilon = 0.2;
  auto* build = app.add_subcommand("build-graph", "Build the epsilon-radius transition graph");
  build->add_option("--log", log_path, "Transition log (JSONL)")->required()->check(CLI::ExistingFile);
  build->add_option("--schema", schema_path, "Feature schema (JSON)")->required()->check(CLI::ExistingFile);
  build->add_option("--epsilon", epsilon, "Node radius in normalized space")->required();
  build->add_option("--metric", metric, "Distance metric")->check(CLI::IsMember({"euclidean"}));
  build->add_option("--out", out_path, "Output graph (JSON)")->required();

  // label-risk
  std::string graph_path, mode = "binary", dead_ends = "safe";
  double learning_rate = 0.01;
  int iterations = 50;
  auto* label = app.add_subcommand("label-risk", "Attach a risk labeling to a graph file");
  label->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  label->add_option("--mode", mode, "binary or prob")->check(CLI::IsMember({"binary", "prob"}));
  label->add_option("--l", learning_rate, "Learning rate for prob mode");
  label->add_option("--iters", iterations, "Iterations for prob mode")->check(CLI::NonNegativeNumber);
  label->add_option("--dead-ends", dead_ends, "Dead-end convention for binary mode")
      ->check(CLI::IsMember({"safe", "risky"}));
  label->add_option("--out", out_path, "Output graph (default: overwrite --graph)");

  // explain
  std::string state_text;
  int depth = 6;
  bool regression = false, denormalize = false;
  LogisticOptions logistic;
  double reg = 1e-3;
  auto* explain = app.add_subcommand("explain", "Direction of risk around a state");
  explain->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  explain->add_option("--state", state_text, "Raw state, comma separated")->required();
  explain->add_option("--depth", depth, "BFS depth limit")->required()->check(CLI::PositiveNumber);
  explain->add_flag("--regression", regression, "Fit probabilistic risk instead of binary labels");
  explain->add_flag("--denormalize", denormalize, "Report weights in raw feature units");
  explain->add_option("--reg", reg, "L2 penalty")->check(CLI::NonNegativeNumber);
  explain->add_option("--iters", logistic.iterations, "Gradient steps (classification)")
      ->check(CLI::PositiveNumber);
  explain->add_option("--step", logistic.step, "Gradient step size (classification)");
  explain->add_option("--out", out_path, "Output JSON (default: stdout)");

  // trace-risk
  std::string episode_path, episode_id, trace_mode = "classification";
  int cap = 6;
  auto* trace = app.add_subcommand("trace-risk", "Per-timestep distance to risk and direction of risk");
  trace->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  trace->add_option("--episode", episode_path, "Episode log (JSONL)")->required()->check(CLI::ExistingFile);
  trace->add_option("--episode-id", episode_id, "Episode to trace (default: first)");
  trace->add_option("--depth", depth, "BFS depth for directions")->required()->check(CLI::PositiveNumber);
  trace->add_option("--cap", cap, "Distance cap")->required()->check(CLI::PositiveNumber);
  trace->add_option("--mode", trace_mode, "distance, classification or regression")
      ->check(CLI::IsMember({"distance", "classification", "regression"}));
  trace->add_option("--reg", reg, "L2 penalty")->check(CLI::NonNegativeNumber);
  trace->add_option("--out", out_path, "Output CSV")->required();

  // heatmap
  std::string trace_path;
  int vscale = 5;
  std::vector<std::string> excluded;
  auto* heatmap = app.add_subcommand("heatmap", "Render a trace CSV as a direction-of-risk heatmap (PPM)");
  heatmap->add_option("--trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  heatmap->add_option("--vscale", vscale, "Pixel rows per feature")->check(CLI::PositiveNumber);
  heatmap->add_option("--exclude-features", excluded, "Features to hide")->delimiter(',');
  heatmap->add_option("--out", out_path, "Output image (.ppm)")->required();

  // compare-baseline
  int samples = 1000;
  auto* compare = app.add_subcommand("compare-baseline",
                                     "Graph explanation next to the perturbation baseline on a grid map");
  compare->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  compare->add_option("--map", map_path, "ASCII map file")->required()->check(CLI::ExistingFile);
  compare->add_option("--state", state_text, "Grid offset x,y")->required();
  compare->add_option("--depth", depth, "BFS depth limit")->required()->check(CLI::PositiveNumber);
  compare->add_option("--seed", seed, "Perturbation seed");
  compare->add_option("--samples", samples, "Perturbation draws")->check(CLI::PositiveNumber);
  compare->add_option("--out", out_path, "Output JSON (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_grid || *gen_cliff) {
      const TransitionLog log = *gen_grid
                                    ? grid_generate(GridMap::load(map_path), episodes, max_steps, seed)
                                    : cliff_generate(episodes, max_steps, seed);
      write_log(out_path, log);
      save_schema(log.schema(), schema_out.empty() ? default_schema_path(out_path) : schema_out);
    } else if (*build) {
      const TransitionLog log = ingest(log_path, load_schema(schema_path));
      save(TransitionGraph::build(log, epsilon, parse_metric(metric)), out_path);
    } else if (*label) {
      AnnotatedGraph model = load(graph_path);
      if (mode == "binary") {
        model.binary = label_binary(model.graph, dead_ends == "risky" ? DeadEndPolicy::kRisky
                                                                     : DeadEndPolicy::kSafe);
      } else {
        model.probabilistic =
            risk_iterate(model.graph, risk_init(model.graph), learning_rate, iterations);
      }
      save(model, out_path.empty() ? graph_path : out_path);
    } else if (*explain) {
      const AnnotatedGraph model = load(graph_path);
      const auto state = parse_state(state_text);
      std::optional<Explanation> e;
      if (regression) {
        if (!model.probabilistic) {
          throw Error(ErrorCode::kInvalidArgument, "graph has no probabilistic risk; run label-risk --mode prob");
        }
        e = direction_of_risk_regression(model.graph, *model.probabilistic, state, depth, reg);
      } else {
        if (!model.binary) {
          throw Error(ErrorCode::kInvalidArgument, "graph has no binary risk; run label-risk --mode binary");
        }
        logistic.reg = reg;
        e = direction_of_risk(model.graph, *model.binary, state, depth, logistic);
      }
      emit_json(explanation_json(e, &model.graph, model.graph.schema().names(), denormalize), out_path);
    } else if (*trace) {
      const AnnotatedGraph model = load(graph_path);
      TraceOptions options;
      options.depth = depth;
      options.cap = cap;
      options.mode = trace_mode == "distance"         ? TraceMode::kDistanceOnly
                     : trace_mode == "classification" ? TraceMode::kClassification
                                                      : TraceMode::kRegression;
      options.logistic.reg = reg;
      options.ridge = reg;
      const auto states = load_episode(episode_path, model.graph.schema(), episode_id);
      write_trace_csv(trace_episode(model, states, options), out_path);
    } else if (*heatmap) {
      write_ppm(render_heatmap(read_trace_csv(trace_path), vscale, excluded), out_path);
    } else if (*compare) {
      const AnnotatedGraph model = load(graph_path);
      if (!model.binary) {
        throw Error(ErrorCode::kInvalidArgument, "graph has no binary risk; run label-risk --mode binary");
      }
      const GridMap map = GridMap::load(map_path);
      const auto state = parse_state(state_text);
      const auto graph_e = direction_of_risk(model.graph, *model.binary, state, depth);
      const auto baseline_e = perturb_explain(state, grid_perturbation_spec(map, samples), seed);
      json doc{{"state", state},
               {"depth", depth},
               {"seed", seed},
               {"transition_graph", explanation_json(graph_e, &model.graph, model.graph.schema().names(), false)},
               {"perturbation_baseline", explanation_json(baseline_e, nullptr, model.graph.schema().names(), false)}};
      emit_json(doc, out_path);
    }
  } catch (const Error& e) {
    json err{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
    if (e.line() != 0) err["error"]["line"] = e.line();
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}
