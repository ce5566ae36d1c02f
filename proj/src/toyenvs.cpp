#include "risklens/toyenvs.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "risklens/error.hpp"

namespace risklens {

namespace {

bool is_tile_char(char c) {
  return c == '.' || c == '#' || c == 'L' || c == 'G' || c == 'S';
}

// Portable conversions from raw engine output; the standard distributions
// are implementation defined.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Heading as a unit step, clockwise from east: E, S, W, N.
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

struct Walker {
  int x = 0;
  int y = 0;
  int heading = 0;

  // Returns the tile entered, or kPassable for rotations and blocked moves.
  Tile apply(const GridMap& map, GridAction action) {
    switch (action) {
      case GridAction::kRotateLeft:
        heading = (heading + 3) % 4;
        return Tile::kPassable;
      case GridAction::kRotateRight:
        heading = (heading + 1) % 4;
        return Tile::kPassable;
      case GridAction::kForward: {
        const int nx = x + kDx[heading];
        const int ny = y + kDy[heading];
        const Tile t = map.at_offset(nx, ny);
        if (t == Tile::kWall) return Tile::kPassable;
        x = nx;
        y = ny;
        return t;
      }
    }
    return Tile::kPassable;
  }
};

TransitionRecord grid_record(const std::string& id, std::uint64_t step, const Walker& w, Tile entered) {
  const bool fatal = entered == Tile::kLava;
  const bool terminal = fatal || entered == Tile::kGoal;
  return TransitionRecord{id, step, {static_cast<double>(w.x), static_cast<double>(w.y)}, fatal, terminal};
}

}  // namespace

GridMap GridMap::parse(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::kInvalidArgument, "map is empty");

  GridMap map;
  map.rows_ = static_cast<int>(lines.size());
  map.cols_ = static_cast<int>(lines.front().size());
  int starts = 0;
  for (int r = 0; r < map.rows_; ++r) {
    const auto& row = lines[r];
    if (static_cast<int>(row.size()) != map.cols_) {
      throw Error(ErrorCode::kInvalidArgument, "map is not rectangular", r + 1);
    }
    for (int c = 0; c < map.cols_; ++c) {
      const char ch = row[c];
      if (!is_tile_char(ch)) {
        throw Error(ErrorCode::kInvalidArgument, std::string("unknown map character '") + ch + "'", r + 1);
      }
      const bool border = r == 0 || c == 0 || r == map.rows_ - 1 || c == map.cols_ - 1;
      if (border && ch != '#') throw Error(ErrorCode::kInvalidArgument, "map border must be wall", r + 1);
      if (ch == 'S') {
        ++starts;
        map.start_col_ = c;
        map.start_row_ = r;
      }
      map.tiles_.push_back(static_cast<Tile>(ch));
    }
  }
  if (starts != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "map must contain exactly one start tile, found " + std::to_string(starts));
  }
  return map;
}

GridMap GridMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open map file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

Tile GridMap::at(int col, int row) const {
  if (col < 0 || row < 0 || col >= cols_ || row >= rows_) return Tile::kWall;
  return tiles_[static_cast<std::size_t>(row) * cols_ + col];
}

Tile GridMap::at_offset(int x, int y) const { return at(start_col_ + x, start_row_ + y); }

TransitionLog grid_generate(const GridMap& map, int episodes, int max_steps, std::uint64_t seed) {
  if (episodes < 0 || max_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 0 and max_steps >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    Episode ep{"grid-" + std::to_string(e), {}};
    Walker w;
    ep.records.push_back(grid_record(ep.id, 0, w, Tile::kStart));
    while (static_cast<int>(ep.records.size()) < max_steps && !ep.records.back().terminal) {
      const auto action = static_cast<GridAction>(uniform_below(rng, 3));
      const Tile entered = w.apply(map, action);
      ep.records.push_back(grid_record(ep.id, ep.records.size(), w, entered));
    }
    out.push_back(std::move(ep));
  }
  return TransitionLog(grid_schema(), std::move(out));
}

Episode grid_rollout(const GridMap& map, std::span<const GridAction> actions, std::string episode_id) {
  Episode ep{std::move(episode_id), {}};
  Walker w;
  ep.records.push_back(grid_record(ep.id, 0, w, Tile::kStart));
  for (GridAction a : actions) {
    if (ep.records.back().terminal) break;
    const Tile entered = w.apply(map, a);
    ep.records.push_back(grid_record(ep.id, ep.records.size(), w, entered));
  }
  return ep;
}

TransitionLog cliff_generate(int episodes, int max_steps, std::uint64_t seed) {
  if (episodes < 0 || max_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 0 and max_steps >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    Episode ep{"cliff-" + std::to_string(e), {}};
    double x = uniform_in(rng, 0.05, 0.35);
    double y = uniform_in(rng, 0.2, 0.8);
    for (int t = 0; t < max_steps; ++t) {
      if (t > 0) {
        x = std::clamp(x + uniform_in(rng, -0.04, 0.06), 0.0, 1.0);
        y = std::clamp(y + uniform_in(rng, -0.05, 0.05), 0.0, 1.0);
      }
      const bool fatal = x > kCliffEdge;
      ep.records.push_back(TransitionRecord{ep.id, static_cast<std::uint64_t>(t), {x, y}, fatal, fatal});
      if (fatal) break;
    }
    out.push_back(std::move(ep));
  }
  return TransitionLog(cliff_schema(), std::move(out));
}

}  // namespace risklens
