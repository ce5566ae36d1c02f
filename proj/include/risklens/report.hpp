#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "risklens/explain.hpp"

namespace risklens {

using Rgb = std::array<std::uint8_t, 3>;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);
  bool operator==(const RgbImage&) const = default;
};

/// Divides a column by its largest absolute entry. All-zero columns stay zero.
std::vector<double> normalize_column(std::span<const double> g);

/// Maps v in [-1, 1] to white->blue for v >= 0 and white->red for v < 0,
/// linearly in |v|, rounding to nearest with ties away from zero.
Rgb heatmap_color(double v);
/// Inverse of heatmap_color up to quantization.
double heatmap_value(Rgb color);

// Episode-wide direction-of-risk image: one column per timestep and
// `vscale` pixel rows per feature. Columns without a direction are white.
// Features named in `exclude` are dropped before per-column normalization.
RgbImage render_heatmap(const EpisodeTrace& trace, int vscale = 5,
                        std::span<const std::string> exclude = {});

void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

/// Columns: step, distance_to_risk, capped, g_<feature>... Capped steps carry
/// the cap as their distance; steps without a direction leave g cells empty.
void write_trace_csv(const EpisodeTrace& trace, std::ostream& out);
void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path);
EpisodeTrace read_trace_csv(std::istream& in);
EpisodeTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace risklens
