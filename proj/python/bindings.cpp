#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "risklens/baseline_perturb.hpp"
#include "risklens/error.hpp"
#include "risklens/explain.hpp"
#include "risklens/log_model.hpp"
#include "risklens/report.hpp"
#include "risklens/risk.hpp"
#include "risklens/toyenvs.hpp"
#include "risklens/transition_graph.hpp"

namespace py = pybind11;
using namespace risklens;

namespace {

using Vec = std::vector<double>;

TraceMode parse_trace_mode(const std::string& mode) {
  if (mode == "distance") return TraceMode::kDistanceOnly;
  if (mode == "classification") return TraceMode::kClassification;
  if (mode == "regression") return TraceMode::kRegression;
  throw Error(ErrorCode::kInvalidArgument, "mode must be distance, classification or regression");
}

}  // namespace

PYBIND11_MODULE(_risklens, m) {
  m.doc() = "Transition-graph risk labeling and direction-of-risk explanations";

  static py::exception<Error> error_type(m, "RisklensError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error_type.ptr())(e.what());
      inst.attr("code") = to_string(e.code());
      inst.attr("line") = e.line();
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  // log model -------------------------------------------------------------

  py::class_<FeatureSchema>(m, "FeatureSchema")
      .def(py::init<std::vector<std::string>>(), py::arg("names"))
      .def_property_readonly("names", &FeatureSchema::names)
      .def_property_readonly("dim", &FeatureSchema::dim)
      .def("__len__", &FeatureSchema::dim)
      .def("__repr__", [](const FeatureSchema& s) {
        return "FeatureSchema(" + py::repr(py::cast(s.names())).cast<std::string>() + ")";
      });
  m.def("load_schema", &load_schema, py::arg("path"));
  m.def("save_schema", &save_schema, py::arg("schema"), py::arg("path"));

  py::class_<TransitionRecord>(m, "TransitionRecord")
      .def_readonly("episode_id", &TransitionRecord::episode_id)
      .def_readonly("step", &TransitionRecord::step)
      .def_readonly("state", &TransitionRecord::state)
      .def_readonly("fatal", &TransitionRecord::fatal)
      .def_readonly("terminal", &TransitionRecord::terminal);

  py::class_<Episode>(m, "Episode")
      .def_readonly("id", &Episode::id)
      .def_readonly("records", &Episode::records)
      .def_property_readonly("states", [](const Episode& e) {
        std::vector<Vec> states;
        for (const auto& r : e.records) states.push_back(r.state);
        return states;
      });

  py::class_<TransitionLog>(m, "TransitionLog")
      .def_property_readonly("schema", &TransitionLog::schema)
      .def_property_readonly("episodes", &TransitionLog::episodes)
      .def_property_readonly("record_count", &TransitionLog::record_count)
      .def_property_readonly("transition_count", &TransitionLog::transition_count)
      .def_property_readonly("fatal_count", &TransitionLog::fatal_count)
      .def("to_jsonl", [](const TransitionLog& log) {
        std::ostringstream out;
        emit_log(out, log);
        return out.str();
      })
      .def("write", [](const TransitionLog& log, const std::filesystem::path& p) { write_log(p, log); },
           py::arg("path"))
      .def(py::self == py::self);

  m.def(
      "parse_log",
      [](const std::string& text, const FeatureSchema& schema) {
        std::istringstream in(text);
        return parse_log(in, schema);
      },
      py::arg("text"), py::arg("schema"), "Parse JSONL records from a string.");
  m.def("ingest", &ingest, py::arg("path"), py::arg("schema"));

  py::class_<Normalizer>(m, "Normalizer")
      .def(py::init<Vec, Vec>(), py::arg("lower"), py::arg("upper"))
      .def_static("fit", &Normalizer::fit, py::arg("log"))
      .def_property_readonly("lower", &Normalizer::lower)
      .def_property_readonly("upper", &Normalizer::upper)
      .def("normalize", [](const Normalizer& n, const Vec& x) { return n.normalize(x); })
      .def("denormalize", [](const Normalizer& n, const Vec& z) { return n.denormalize(z); });

  // graph -----------------------------------------------------------------

  py::class_<GraphNode>(m, "GraphNode")
      .def_readonly("representative", &GraphNode::representative)
      .def_readonly("s_total", &GraphNode::s_total)
      .def_readonly("s_fatal", &GraphNode::s_fatal);

  py::class_<GraphEdge>(m, "GraphEdge")
      .def_readonly("source", &GraphEdge::from)
      .def_readonly("target", &GraphEdge::to)
      .def_readonly("multiplicity", &GraphEdge::multiplicity)
      .def("__iter__", [](const GraphEdge& e) {
        return py::iter(py::make_tuple(e.from, e.to, e.multiplicity));
      });

  py::class_<TransitionGraph>(m, "TransitionGraph")
      .def_static(
          "build",
          [](const TransitionLog& log, double epsilon, const std::string& metric) {
            return TransitionGraph::build(log, epsilon, parse_metric(metric));
          },
          py::arg("log"), py::arg("epsilon"), py::arg("metric") = "euclidean")
      .def_property_readonly("epsilon", &TransitionGraph::epsilon)
      .def_property_readonly("features", [](const TransitionGraph& g) { return g.schema().names(); })
      .def_property_readonly("normalizer", &TransitionGraph::normalizer)
      .def_property_readonly("node_count", &TransitionGraph::node_count)
      .def_property_readonly("edge_count", &TransitionGraph::edge_count)
      .def_property_readonly("nodes", &TransitionGraph::nodes)
      .def_property_readonly("edges", &TransitionGraph::edges)
      .def("successors",
           [](const TransitionGraph& g, NodeId id) {
             if (id >= g.node_count()) throw Error(ErrorCode::kInvalidArgument, "node id out of range");
             std::vector<NodeId> out;
             for (const auto& e : g.out_edges(id)) out.push_back(e.to);
             return out;
           },
           py::arg("node"))
      .def("find_node", [](const TransitionGraph& g, const Vec& raw) { return g.find_node(raw); },
           py::arg("state"))
      .def(py::self == py::self);

  // risk ------------------------------------------------------------------

  py::enum_<DeadEndPolicy>(m, "DeadEndPolicy")
      .value("SAFE", DeadEndPolicy::kSafe)
      .value("RISKY", DeadEndPolicy::kRisky);

  py::class_<BinaryRiskLabeling>(m, "BinaryRiskLabeling")
      .def_readonly("risky", &BinaryRiskLabeling::risky)
      .def_readonly("dead_ends", &BinaryRiskLabeling::dead_ends)
      .def_property_readonly("risky_count", &BinaryRiskLabeling::risky_count)
      .def_property_readonly("risky_ids", &BinaryRiskLabeling::risky_ids);

  py::class_<ProbabilisticRisk>(m, "ProbabilisticRisk")
      .def(py::init<>())
      .def_readwrite("values", &ProbabilisticRisk::values)
      .def_readonly("iterations", &ProbabilisticRisk::iterations)
      .def_readonly("learning_rate", &ProbabilisticRisk::learning_rate);

  m.def("label_binary", &label_binary, py::arg("graph"), py::arg("dead_ends") = DeadEndPolicy::kSafe);
  m.def("risk_init", &risk_init, py::arg("graph"));
  m.def("risk_iterate", &risk_iterate, py::arg("graph"), py::arg("risk"), py::arg("learning_rate"),
        py::arg("iterations"));

  py::class_<AnnotatedGraph>(m, "AnnotatedGraph")
      .def(py::init([](TransitionGraph g) { return AnnotatedGraph{std::move(g), std::nullopt, std::nullopt}; }),
           py::arg("graph"))
      .def_readonly("graph", &AnnotatedGraph::graph)
      .def_readwrite("binary", &AnnotatedGraph::binary)
      .def_readwrite("probabilistic", &AnnotatedGraph::probabilistic)
      .def("to_json", [](const AnnotatedGraph& a) { return to_json_string(a); })
      .def_static("from_json", [](const std::string& text) { return from_json_string(text); }, py::arg("text"))
      .def("save", [](const AnnotatedGraph& a, const std::filesystem::path& p) { save(a, p); }, py::arg("path"))
      .def_static("load", &load, py::arg("path"));

  // explanations ----------------------------------------------------------

  py::class_<ReachedNode>(m, "ReachedNode")
      .def_readonly("id", &ReachedNode::id)
      .def_readonly("depth", &ReachedNode::depth);

  py::class_<ReachableSet>(m, "ReachableSet")
      .def_readonly("origin", &ReachableSet::origin)
      .def_readonly("depth", &ReachableSet::depth)
      .def_readonly("nodes", &ReachableSet::nodes)
      .def("__len__", &ReachableSet::size)
      .def("__contains__", &ReachableSet::contains);

  py::enum_<SurrogateMode>(m, "SurrogateMode")
      .value("CLASSIFICATION", SurrogateMode::kClassification)
      .value("REGRESSION", SurrogateMode::kRegression);

  py::class_<Explanation>(m, "Explanation")
      .def_readonly("g", &Explanation::g)
      .def_readonly("bias", &Explanation::bias)
      .def_readonly("mode", &Explanation::mode)
      .def_readonly("origin", &Explanation::origin)
      .def_readonly("reachable_size", &Explanation::reachable_size)
      .def_readonly("risky_count", &Explanation::risky_count)
      .def_readonly("query_clamped", &Explanation::query_clamped);

  m.def(
      "reachable",
      [](const TransitionGraph& g, const Vec& state, int depth) { return reachable(g, state, depth); },
      py::arg("graph"), py::arg("state"), py::arg("depth"));
  m.def(
      "direction_of_risk",
      [](const TransitionGraph& g, const BinaryRiskLabeling& risk, const Vec& state, int depth, double reg,
         double step, int iterations) {
        return direction_of_risk(g, risk, state, depth, LogisticOptions{reg, step, iterations});
      },
      py::arg("graph"), py::arg("risk"), py::arg("state"), py::arg("depth"), py::arg("reg") = 1e-3,
      py::arg("step") = 0.1, py::arg("iterations") = 500,
      "Logistic surrogate over the reachable set; None when the labels are single-class.");
  m.def(
      "direction_of_risk_regression",
      [](const TransitionGraph& g, const ProbabilisticRisk& risk, const Vec& state, int depth, double reg) {
        return direction_of_risk_regression(g, risk, state, depth, reg);
      },
      py::arg("graph"), py::arg("risk"), py::arg("state"), py::arg("depth"), py::arg("reg") = 1e-3);
  m.def(
      "denormalize_weights",
      [](const Vec& g, const Normalizer& n) { return denormalize_weights(g, n); }, py::arg("g"),
      py::arg("normalizer"));

  py::class_<DistanceToRisk>(m, "DistanceToRisk")
      .def_readonly("hops", &DistanceToRisk::hops)
      .def_readonly("capped", &DistanceToRisk::capped)
      .def("__repr__", [](const DistanceToRisk& d) {
        return "DistanceToRisk(hops=" + std::to_string(d.hops) + ", capped=" + (d.capped ? "True" : "False") + ")";
      });
  m.def(
      "distance_to_risk",
      [](const TransitionGraph& g, const BinaryRiskLabeling& risk, const Vec& state, int cap) {
        return distance_to_risk(g, risk, state, cap);
      },
      py::arg("graph"), py::arg("risk"), py::arg("state"), py::arg("cap"));

  py::class_<TraceStep>(m, "TraceStep")
      .def_readonly("distance", &TraceStep::distance)
      .def_readonly("g", &TraceStep::g);

  py::class_<EpisodeTrace>(m, "EpisodeTrace")
      .def_readonly("cap", &EpisodeTrace::cap)
      .def_readonly("features", &EpisodeTrace::features)
      .def_readonly("steps", &EpisodeTrace::steps)
      .def("__len__", &EpisodeTrace::size);

  m.def(
      "trace_episode",
      [](const AnnotatedGraph& model, const std::vector<Vec>& states, int depth, int cap,
         const std::string& mode, double reg) {
        TraceOptions opts;
        opts.depth = depth;
        opts.cap = cap;
        opts.mode = parse_trace_mode(mode);
        opts.logistic.reg = reg;
        opts.ridge = reg;
        return trace_episode(model, states, opts);
      },
      py::arg("model"), py::arg("states"), py::arg("depth") = 6, py::arg("cap") = 6,
      py::arg("mode") = "classification", py::arg("reg") = 1e-3);

  // reports ---------------------------------------------------------------

  py::class_<RgbImage>(m, "RgbImage")
      .def_readonly("width", &RgbImage::width)
      .def_readonly("height", &RgbImage::height)
      .def_property_readonly("pixels",
                             [](const RgbImage& img) {
                               return py::bytes(reinterpret_cast<const char*>(img.pixels.data()),
                                                img.pixels.size());
                             })
      .def("at", &RgbImage::at, py::arg("x"), py::arg("y"));

  m.def("render_heatmap",
        [](const EpisodeTrace& trace, int vscale, const std::vector<std::string>& exclude) {
          return render_heatmap(trace, vscale, exclude);
        },
        py::arg("trace"), py::arg("vscale") = 5, py::arg("exclude") = std::vector<std::string>{});
  m.def("write_ppm", &write_ppm, py::arg("image"), py::arg("path"));
  m.def("read_ppm", &read_ppm, py::arg("path"));
  m.def("write_trace_csv",
        py::overload_cast<const EpisodeTrace&, const std::filesystem::path&>(&write_trace_csv),
        py::arg("trace"), py::arg("path"));
  m.def("read_trace_csv", py::overload_cast<const std::filesystem::path&>(&read_trace_csv), py::arg("path"));

  // toy environments and the perturbation baseline -------------------------

  py::class_<GridMap>(m, "GridMap")
      .def_static("parse", &GridMap::parse, py::arg("text"))
      .def_static("load", &GridMap::load, py::arg("path"))
      .def_property_readonly("rows", &GridMap::rows)
      .def_property_readonly("cols", &GridMap::cols)
      .def("tile_at_offset", [](const GridMap& map, int x, int y) {
        return std::string(1, static_cast<char>(map.at_offset(x, y)));
      });

  m.def("grid_generate", &grid_generate, py::arg("map"), py::arg("episodes"), py::arg("max_steps"),
        py::arg("seed"));
  m.def("cliff_generate", &cliff_generate, py::arg("episodes"), py::arg("max_steps"), py::arg("seed"));
  m.def(
      "grid_rollout",
      [](const GridMap& map, const std::string& actions) {
        std::vector<GridAction> script;
        for (char c : actions) {
          switch (c) {
            case 'F': script.push_back(GridAction::kForward); break;
            case 'L': script.push_back(GridAction::kRotateLeft); break;
            case 'R': script.push_back(GridAction::kRotateRight); break;
            default: throw Error(ErrorCode::kInvalidArgument, "actions are F, L or R");
          }
        }
        return grid_rollout(map, script);
      },
      py::arg("map"), py::arg("actions"), "Scripted rollout; actions is a string over F (forward), L and R.");
  m.def(
      "perturb_explain_grid",
      [](const GridMap& map, const Vec& state, std::uint64_t seed, int samples) {
        return perturb_explain(state, grid_perturbation_spec(map, samples), seed);
      },
      py::arg("map"), py::arg("state"), py::arg("seed"), py::arg("samples") = 1000);
}
