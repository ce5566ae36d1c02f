#include "risklens/transition_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "nearest_index.hpp"
#include "risklens/error.hpp"

namespace risklens {

using json = nlohmann::json;

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kEuclidean:
      return "euclidean";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  throw Error(ErrorCode::kInvalidArgument, "unsupported metric '" + std::string(name) + "'");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::size_t BinaryRiskLabeling::risky_count() const {
  return static_cast<std::size_t>(std::count(risky.begin(), risky.end(), true));
}

std::vector<NodeId> BinaryRiskLabeling::risky_ids() const {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < risky.size(); ++i) {
    if (risky[i]) ids.push_back(static_cast<NodeId>(i));
  }
  return ids;
}

TransitionGraph TransitionGraph::build(const TransitionLog& log, double epsilon, Metric metric) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be a positive finite number");
  }
  if (log.empty()) throw Error(ErrorCode::kEmptyInput, "cannot build a graph from an empty log");

  TransitionGraph g;
  g.epsilon_ = epsilon;
  g.metric_ = metric;
  g.schema_ = log.schema();
  g.normalizer_ = Normalizer::fit(log);

  std::vector<std::vector<double>> reps;
  detail::CellGrid grid(g.dim(), epsilon);
  std::vector<std::map<NodeId, std::uint64_t>> adjacency;

  for (const auto& episode : log.episodes()) {
    std::optional<NodeId> previous;
    for (const auto& rec : episode.records) {
      StateVector z = g.normalizer_.normalize(rec.state);
      const detail::Nearest hit = grid.nearest_candidate(z, reps);
      NodeId id;
      if (hit.squared != std::numeric_limits<double>::infinity() &&
          std::sqrt(hit.squared) <= epsilon) {
        id = hit.id;
        ++g.nodes_[id].s_total;
      } else {
        id = static_cast<NodeId>(reps.size());
        grid.insert(id, z);
        g.nodes_.push_back(GraphNode{z, 1, 0});
        reps.push_back(std::move(z));
        adjacency.emplace_back();
      }
      if (rec.fatal) ++g.nodes_[id].s_fatal;
      if (previous) ++adjacency[*previous][id];
      previous = id;
    }
  }

  std::vector<GraphEdge> edges;
  for (std::size_t from = 0; from < adjacency.size(); ++from) {
    for (const auto& [to, count] : adjacency[from]) {
      edges.push_back(GraphEdge{static_cast<NodeId>(from), to, count});
    }
  }
  g.index_edges(std::move(edges));
  g.index_ = std::make_shared<detail::KdTree>(reps, g.dim());
  return g;
}

TransitionGraph TransitionGraph::from_parts(double epsilon, FeatureSchema schema,
                                            Normalizer normalizer, std::vector<GraphNode> nodes,
                                            std::vector<GraphEdge> edges, Metric metric) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be a positive finite number");
  }
  if (normalizer.dim() != schema.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "normalizer and schema disagree on dimension");
  }
  std::vector<std::vector<double>> reps;
  reps.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.representative.size() != schema.dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "node " + std::to_string(i) + " representative has wrong dimension");
    }
    if (n.s_total < 1 || n.s_fatal > n.s_total) {
      throw Error(ErrorCode::kInvalidArgument,
                  "node " + std::to_string(i) + " violates 0 <= s_fatal <= s_total, s_total >= 1");
    }
    reps.push_back(n.representative);
  }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.from >= nodes.size() || e.to >= nodes.size()) {
      throw Error(ErrorCode::kInvalidArgument, "edge endpoint refers to a missing node");
    }
    if (e.multiplicity < 1) throw Error(ErrorCode::kInvalidArgument, "edge multiplicity must be >= 1");
    if (i > 0 && edges[i - 1].from == e.from && edges[i - 1].to == e.to) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate edge " + std::to_string(e.from) + "->" +
                                                   std::to_string(e.to));
    }
  }

  TransitionGraph g;
  g.epsilon_ = epsilon;
  g.metric_ = metric;
  g.schema_ = std::move(schema);
  g.normalizer_ = std::move(normalizer);
  g.nodes_ = std::move(nodes);
  g.index_edges(std::move(edges));
  g.index_ = std::make_shared<detail::KdTree>(reps, g.dim());
  return g;
}

// Expects edges sorted by (from, to).
void TransitionGraph::index_edges(std::vector<GraphEdge> edges) {
  const std::size_t n = nodes_.size();
  out_offsets_.assign(n + 1, 0);
  pred_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++out_offsets_[e.from + 1];
    ++pred_offsets_[e.to + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    pred_offsets_[i + 1] += pred_offsets_[i];
  }
  out_.clear();
  out_.reserve(edges.size());
  for (const auto& e : edges) out_.push_back(OutEdge{e.to, e.multiplicity});

  // Edges are visited in ascending `from`, so each predecessor list ends up
  // sorted.
  preds_.assign(edges.size(), 0);
  std::vector<std::size_t> fill(pred_offsets_.begin(), pred_offsets_.end() - 1);
  for (const auto& e : edges) preds_[fill[e.to]++] = e.from;
}

std::span<const OutEdge> TransitionGraph::out_edges(NodeId id) const {
  if (id >= nodes_.size()) throw Error(ErrorCode::kInvalidArgument, "node id out of range");
  return {out_.data() + out_offsets_[id], out_offsets_[id + 1] - out_offsets_[id]};
}

std::span<const NodeId> TransitionGraph::predecessors(NodeId id) const {
  if (id >= nodes_.size()) throw Error(ErrorCode::kInvalidArgument, "node id out of range");
  return {preds_.data() + pred_offsets_[id], pred_offsets_[id + 1] - pred_offsets_[id]};
}

std::uint64_t TransitionGraph::total_multiplicity() const noexcept {
  std::uint64_t total = 0;
  for (const auto& e : out_) total += e.multiplicity;
  return total;
}

std::vector<GraphEdge> TransitionGraph::edges() const {
  std::vector<GraphEdge> result;
  result.reserve(out_.size());
  for (std::size_t from = 0; from < nodes_.size(); ++from) {
    for (std::size_t i = out_offsets_[from]; i < out_offsets_[from + 1]; ++i) {
      result.push_back(GraphEdge{static_cast<NodeId>(from), out_[i].to, out_[i].multiplicity});
    }
  }
  return result;
}

NodeId TransitionGraph::find_node(std::span<const double> raw_state) const {
  if (raw_state.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has " + std::to_string(raw_state.size()) + " components, graph expects " +
                    std::to_string(dim()));
  }
  return find_node_normalized(normalizer_.normalize_clamped(raw_state).values);
}

NodeId TransitionGraph::find_node_normalized(std::span<const double> normalized) const {
  if (normalized.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dimension does not match graph");
  }
  if (nodes_.empty() || !index_) throw Error(ErrorCode::kEmptyInput, "graph has no nodes");
  return index_->nearest(normalized).id;
}

bool TransitionGraph::operator==(const TransitionGraph& other) const {
  return epsilon_ == other.epsilon_ && metric_ == other.metric_ && schema_ == other.schema_ &&
         normalizer_ == other.normalizer_ && nodes_ == other.nodes_ &&
         out_offsets_ == other.out_offsets_ && out_ == other.out_;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json graph_to_json(const AnnotatedGraph& model) {
  const TransitionGraph& g = model.graph;
  json nodes = json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<NodeId>(i));
    nodes.push_back(
        {{"id", i}, {"representative", n.representative}, {"s_total", n.s_total}, {"s_fatal", n.s_fatal}});
  }
  json edges = json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"multiplicity", e.multiplicity}});
  }
  json doc{{"version", kGraphFileVersion},
           {"epsilon", g.epsilon()},
           {"metric", to_string(g.metric())},
           {"schema", {{"features", g.schema().names()}}},
           {"normalizer", {{"min", g.normalizer().lower()}, {"max", g.normalizer().upper()}}},
           {"nodes", std::move(nodes)},
           {"edges", std::move(edges)}};

  if (model.binary || model.probabilistic) {
    json risk = json::object();
    if (model.binary) {
      risk["binary"] = model.binary->risky_ids();
      risk["dead_ends_risky"] = model.binary->dead_ends == DeadEndPolicy::kRisky;
    }
    if (model.probabilistic) {
      risk["probabilistic"] = {{"l", model.probabilistic->learning_rate},
                               {"iterations", model.probabilistic->iterations},
                               {"values", model.probabilistic->values}};
    }
    doc["risk"] = std::move(risk);
  }
  return doc;
}

template <typename T>
T get_field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kCorruptFile, std::string("graph file missing field '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("graph file field '") + key + "': " + e.what());
  }
}

AnnotatedGraph graph_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kCorruptFile, "graph file has no version tag");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kGraphFileVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported graph file version " + doc["version"].dump() +
                                                 " (expected " + std::to_string(kGraphFileVersion) + ")");
  }

  const auto epsilon = get_field<double>(doc, "epsilon");
  const Metric metric = parse_metric(get_field<std::string>(doc, "metric"));
  FeatureSchema schema(get_field<std::vector<std::string>>(get_field<json>(doc, "schema"), "features"));
  const json bounds = get_field<json>(doc, "normalizer");
  Normalizer normalizer(get_field<std::vector<double>>(bounds, "min"),
                        get_field<std::vector<double>>(bounds, "max"));

  std::vector<GraphNode> nodes;
  const json node_list = get_field<json>(doc, "nodes");
  if (!node_list.is_array()) throw Error(ErrorCode::kCorruptFile, "'nodes' must be an array");
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const json& n = node_list[i];
    if (get_field<std::size_t>(n, "id") != i) {
      throw Error(ErrorCode::kCorruptFile, "node ids must be dense and ordered");
    }
    nodes.push_back(GraphNode{get_field<std::vector<double>>(n, "representative"),
                              get_field<std::uint64_t>(n, "s_total"),
                              get_field<std::uint64_t>(n, "s_fatal")});
  }
  std::vector<GraphEdge> edges;
  const json edge_list = get_field<json>(doc, "edges");
  if (!edge_list.is_array()) throw Error(ErrorCode::kCorruptFile, "'edges' must be an array");
  for (const json& e : edge_list) {
    edges.push_back(GraphEdge{get_field<NodeId>(e, "from"), get_field<NodeId>(e, "to"),
                              get_field<std::uint64_t>(e, "multiplicity")});
  }

  AnnotatedGraph model;
  try {
    model.graph = TransitionGraph::from_parts(epsilon, std::move(schema), std::move(normalizer),
                                              std::move(nodes), std::move(edges), metric);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("graph file: ") + e.what());
  }

  if (doc.contains("risk")) {
    const json& risk = doc["risk"];
    const std::size_t n = model.graph.node_count();
    if (risk.contains("binary")) {
      BinaryRiskLabeling labeling;
      labeling.risky.assign(n, false);
      for (auto id : get_field<std::vector<NodeId>>(risk, "binary")) {
        if (id >= n) throw Error(ErrorCode::kCorruptFile, "risky node id out of range");
        labeling.risky[id] = true;
      }
      if (risk.contains("dead_ends_risky") && get_field<bool>(risk, "dead_ends_risky")) {
        labeling.dead_ends = DeadEndPolicy::kRisky;
      }
      model.binary = std::move(labeling);
    }
    if (risk.contains("probabilistic")) {
      const json& p = risk["probabilistic"];
      ProbabilisticRisk values{get_field<std::vector<double>>(p, "values"),
                               get_field<int>(p, "iterations"), get_field<double>(p, "l")};
      if (values.values.size() != n) {
        throw Error(ErrorCode::kCorruptFile, "probabilistic risk has wrong number of values");
      }
      model.probabilistic = std::move(values);
    }
  }
  return model;
}

}  // namespace

std::string to_json_string(const AnnotatedGraph& model) { return graph_to_json(model).dump(1) + "\n"; }

AnnotatedGraph from_json_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("graph file is not valid JSON: ") + e.what());
  }
  return graph_from_json(doc);
}

void save(const AnnotatedGraph& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write graph file " + path.string());
  out << to_json_string(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void save(const TransitionGraph& graph, const std::filesystem::path& path) {
  save(AnnotatedGraph{graph, std::nullopt, std::nullopt}, path);
}

AnnotatedGraph load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open graph file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

}  // namespace risklens
