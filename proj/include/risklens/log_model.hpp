#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace risklens {

using StateVector = std::vector<double>;

/// Ordered, unique feature names. The position of a name is the index of the
/// corresponding component in every state vector.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);

  std::size_t dim() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Reads a sidecar schema document of the form {"features": [names...]}.
FeatureSchema load_schema(const std::filesystem::path& path);
void save_schema(const FeatureSchema& schema, const std::filesystem::path& path);

struct TransitionRecord {
  std::string episode_id;
  std::uint64_t step = 0;
  StateVector state;
  bool fatal = false;
  bool terminal = false;

  bool operator==(const TransitionRecord&) const = default;
};

struct Episode {
  std::string id;
  std::vector<TransitionRecord> records;

  bool operator==(const Episode&) const = default;
};

/// Validated, immutable collection of episodes. Transitions are implicit
/// between consecutive records of an episode.
class TransitionLog {
 public:
  TransitionLog() = default;
  /// Throws Error if any record violates the log invariants.
  TransitionLog(FeatureSchema schema, std::vector<Episode> episodes);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<Episode>& episodes() const noexcept { return episodes_; }

  std::size_t record_count() const noexcept;
  std::size_t fatal_count() const noexcept;
  std::size_t transition_count() const noexcept;
  bool empty() const noexcept { return record_count() == 0; }

  bool operator==(const TransitionLog&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<Episode> episodes_;
};

/// Parses line-delimited JSON records. Records are grouped into episodes by
/// id in order of first appearance; blank lines are skipped.
TransitionLog parse_log(std::istream& in, const FeatureSchema& schema);
TransitionLog ingest(const std::filesystem::path& path, const FeatureSchema& schema);

void emit_log(std::ostream& out, const TransitionLog& log);
void write_log(const std::filesystem::path& path, const TransitionLog& log);

struct NormalizedState {
  StateVector values;
  bool clamped = false;
};

/// Per-dimension min-max scaling into [0,1]. Degenerate dimensions (max ==
/// min) map to 0.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> lower, std::vector<double> upper);

  static Normalizer fit(const TransitionLog& log);

  std::size_t dim() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double range(std::size_t d) const { return upper_[d] - lower_[d]; }

  StateVector normalize(std::span<const double> raw) const;
  /// Normalizes and clamps each component to [0,1]; `clamped` reports
  /// whether any component was outside the fitted bounds.
  NormalizedState normalize_clamped(std::span<const double> raw) const;
  StateVector denormalize(std::span<const double> normalized) const;

  bool operator==(const Normalizer&) const = default;

 private:
  void check_dim(std::size_t n) const;

  std::vector<double> lower_;
  std::vector<double> upper_;
};

inline Normalizer fit_normalizer(const TransitionLog& log) { return Normalizer::fit(log); }

}  // namespace risklens
