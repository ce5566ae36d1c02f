#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "risklens/log_model.hpp"

namespace risklens {

enum class Tile : char {
  kPassable = '.',
  kWall = '#',
  kLava = 'L',
  kGoal = 'G',
  kStart = 'S',
};

// Rectangular tile map with a wall border and exactly one start tile.
// Positions are addressed either by (col, row) or by offsets (x, y) from the
// start tile, with x growing to the right and y growing downwards.
class GridMap {
 public:
  static GridMap parse(std::string_view text);
  static GridMap load(const std::filesystem::path& path);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int start_col() const noexcept { return start_col_; }
  int start_row() const noexcept { return start_row_; }

  Tile at(int col, int row) const;
  /// Tile at an offset from the start; anything outside the map is wall.
  Tile at_offset(int x, int y) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int start_col_ = 0;
  int start_row_ = 0;
  std::vector<Tile> tiles_;
};

enum class GridAction { kForward = 0, kRotateLeft = 1, kRotateRight = 2 };

inline const FeatureSchema& grid_schema() {
  static const FeatureSchema schema({"x", "y"});
  return schema;
}

// Uniform random policy over {forward, rotate-left, rotate-right}, starting
// at offset (0, 0) facing east. Forward into a wall is a no-op. Entering lava
// ends the episode with a fatal terminal record; entering the goal ends it
// with a non-fatal terminal record. Each episode has at most `max_steps`
// records. Emitted features are (x, y).
TransitionLog grid_generate(const GridMap& map, int episodes, int max_steps, std::uint64_t seed);

/// Runs a fixed action script from the start and returns the visited states,
/// stopping early at lava or goal.
Episode grid_rollout(const GridMap& map, std::span<const GridAction> actions,
                     std::string episode_id = "scripted");

inline const FeatureSchema& cliff_schema() {
  static const FeatureSchema schema({"x", "y"});
  return schema;
}

inline constexpr double kCliffEdge = 0.9;

// Continuous random walk on [0,1]^2. Each step adds a bounded random
// displacement with a slight drift towards the cliff; any state with
// x > kCliffEdge is fatal and ends the episode.
TransitionLog cliff_generate(int episodes, int max_steps, std::uint64_t seed);

}  // namespace risklens
