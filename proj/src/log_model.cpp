#include "risklens/log_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "risklens/error.hpp"

namespace risklens {

using json = nlohmann::json;

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "schema must name at least one feature");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "feature names must be non-empty");
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate feature name '" + name + "'");
    }
  }
}

FeatureSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open schema file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "schema " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(ErrorCode::kParse, "schema " + path.string() + ": expected {\"features\": [...]}");
  }
  std::vector<std::string> names;
  for (const auto& item : doc["features"]) {
    if (!item.is_string()) throw Error(ErrorCode::kParse, "schema feature names must be strings");
    names.push_back(item.get<std::string>());
  }
  return FeatureSchema(std::move(names));
}

void save_schema(const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write schema file " + path.string());
  out << json{{"features", schema.names()}}.dump(2) << '\n';
}

namespace {

// Tracks per-episode progress so violations can be reported at the offending
// record rather than after the whole log is assembled.
struct EpisodeCursor {
  std::size_t index = 0;
  bool terminated = false;
};

void check_record(const TransitionRecord& rec, std::size_t dim, bool after_terminal,
                  std::uint64_t expected_step, std::size_t line) {
  if (rec.state.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state has " + std::to_string(rec.state.size()) + " components, schema expects " +
                    std::to_string(dim),
                line);
  }
  if (rec.fatal && !rec.terminal) {
    throw Error(ErrorCode::kInvalidArgument, "fatal record must also be terminal", line);
  }
  if (after_terminal) {
    throw Error(ErrorCode::kRecordAfterTerminal,
                "record follows a terminal record in episode '" + rec.episode_id + "'", line);
  }
  if (rec.step != expected_step) {
    throw Error(ErrorCode::kNonConsecutiveStep,
                "episode '" + rec.episode_id + "' expected step " + std::to_string(expected_step) +
                    ", got " + std::to_string(rec.step),
                line);
  }
}

TransitionRecord record_from_json(const json& obj, std::size_t line) {
  auto fail = [line](const std::string& what) { return Error(ErrorCode::kParse, what, line); };
  if (!obj.is_object()) throw fail("record must be a JSON object");

  TransitionRecord rec;
  auto it = obj.find("episode");
  if (it == obj.end() || !it->is_string()) throw fail("field 'episode' must be a string");
  rec.episode_id = it->get<std::string>();

  it = obj.find("step");
  if (it == obj.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw fail("field 'step' must be a non-negative integer");
  }
  rec.step = it->get<std::uint64_t>();

  it = obj.find("state");
  if (it == obj.end() || !it->is_array()) throw fail("field 'state' must be an array");
  rec.state.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw fail("field 'state' must contain only numbers");
    rec.state.push_back(v.get<double>());
  }

  for (const char* key : {"fatal", "terminal"}) {
    it = obj.find(key);
    if (it == obj.end() || !it->is_boolean()) {
      throw fail(std::string("field '") + key + "' must be a boolean");
    }
  }
  rec.fatal = obj["fatal"].get<bool>();
  rec.terminal = obj["terminal"].get<bool>();
  return rec;
}

}  // namespace

TransitionLog::TransitionLog(FeatureSchema schema, std::vector<Episode> episodes)
    : schema_(std::move(schema)), episodes_(std::move(episodes)) {
  std::unordered_set<std::string> ids;
  for (const auto& ep : episodes_) {
    if (!ids.insert(ep.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate episode id '" + ep.id + "'");
    }
    bool terminated = false;
    std::uint64_t step = 0;
    for (const auto& rec : ep.records) {
      if (rec.episode_id != ep.id) {
        throw Error(ErrorCode::kInvalidArgument,
                    "record episode id '" + rec.episode_id + "' inside episode '" + ep.id + "'");
      }
      check_record(rec, schema_.dim(), terminated, step++, 0);
      terminated = rec.terminal;
    }
  }
}

std::size_t TransitionLog::record_count() const noexcept {
  std::size_t n = 0;
  for (const auto& ep : episodes_) n += ep.records.size();
  return n;
}

std::size_t TransitionLog::fatal_count() const noexcept {
  std::size_t n = 0;
  for (const auto& ep : episodes_) {
    n += static_cast<std::size_t>(
        std::count_if(ep.records.begin(), ep.records.end(), [](const auto& r) { return r.fatal; }));
  }
  return n;
}

std::size_t TransitionLog::transition_count() const noexcept {
  std::size_t n = 0;
  for (const auto& ep : episodes_) {
    if (!ep.records.empty()) n += ep.records.size() - 1;
  }
  return n;
}

TransitionLog parse_log(std::istream& in, const FeatureSchema& schema) {
  std::vector<Episode> episodes;
  std::unordered_map<std::string, EpisodeCursor> cursors;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, std::string("malformed JSON: ") + e.what(), line);
    }
    TransitionRecord rec = record_from_json(obj, line);

    auto found = cursors.find(rec.episode_id);
    EpisodeCursor* cursor = found == cursors.end() ? nullptr : &found->second;
    check_record(rec, schema.dim(), cursor && cursor->terminated,
                 cursor ? episodes[cursor->index].records.size() : 0, line);

    if (!cursor) {
      cursor = &cursors.emplace(rec.episode_id, EpisodeCursor{episodes.size(), false}).first->second;
      episodes.push_back(Episode{rec.episode_id, {}});
    }
    cursor->terminated = rec.terminal;
    episodes[cursor->index].records.push_back(std::move(rec));
  }
  return TransitionLog(schema, std::move(episodes));
}

TransitionLog ingest(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open log file " + path.string());
  return parse_log(in, schema);
}

void emit_log(std::ostream& out, const TransitionLog& log) {
  for (const auto& ep : log.episodes()) {
    for (const auto& rec : ep.records) {
      json obj{{"episode", rec.episode_id},
               {"step", rec.step},
               {"state", rec.state},
               {"fatal", rec.fatal},
               {"terminal", rec.terminal}};
      out << obj.dump() << '\n';
    }
  }
}

void write_log(const std::filesystem::path& path, const TransitionLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write log file " + path.string());
  emit_log(out, log);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Normalizer::Normalizer(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "normalizer bounds differ in length");
  }
  for (std::size_t d = 0; d < lower_.size(); ++d) {
    if (!(lower_[d] <= upper_[d])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "normalizer lower bound exceeds upper bound in dimension " + std::to_string(d));
    }
  }
}

Normalizer Normalizer::fit(const TransitionLog& log) {
  if (log.empty()) throw Error(ErrorCode::kEmptyInput, "cannot fit normalizer on an empty log");
  const std::size_t dim = log.schema().dim();
  std::vector<double> lo(dim), hi(dim);
  bool first = true;
  for (const auto& ep : log.episodes()) {
    for (const auto& rec : ep.records) {
      for (std::size_t d = 0; d < dim; ++d) {
        if (first) {
          lo[d] = hi[d] = rec.state[d];
        } else {
          lo[d] = std::min(lo[d], rec.state[d]);
          hi[d] = std::max(hi[d], rec.state[d]);
        }
      }
      first = false;
    }
  }
  return Normalizer(std::move(lo), std::move(hi));
}

void Normalizer::check_dim(std::size_t n) const {
  if (n != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(n) + " components, expected " + std::to_string(dim()));
  }
}

StateVector Normalizer::normalize(std::span<const double> raw) const {
  check_dim(raw.size());
  StateVector out(raw.size());
  for (std::size_t d = 0; d < raw.size(); ++d) {
    const double span = upper_[d] - lower_[d];
    out[d] = span > 0.0 ? (raw[d] - lower_[d]) / span : 0.0;
  }
  return out;
}

NormalizedState Normalizer::normalize_clamped(std::span<const double> raw) const {
  NormalizedState result{normalize(raw), false};
  for (std::size_t d = 0; d < raw.size(); ++d) {
    if (raw[d] < lower_[d] || raw[d] > upper_[d]) result.clamped = true;
    result.values[d] = std::clamp(result.values[d], 0.0, 1.0);
  }
  return result;
}

StateVector Normalizer::denormalize(std::span<const double> normalized) const {
  check_dim(normalized.size());
  StateVector out(normalized.size());
  for (std::size_t d = 0; d < normalized.size(); ++d) {
    out[d] = lower_[d] + normalized[d] * (upper_[d] - lower_[d]);
  }
  return out;
}

}  // namespace risklens
