#include "risklens/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "risklens/error.hpp"

namespace risklens {

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels.at(i), pixels.at(i + 1), pixels.at(i + 2)};
}

void RgbImage::set(int x, int y, Rgb color) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels.at(i) = color[0];
  pixels.at(i + 1) = color[1];
  pixels.at(i + 2) = color[2];
}

std::vector<double> normalize_column(std::span<const double> g) {
  double peak = 0.0;
  for (double v : g) peak = std::max(peak, std::abs(v));
  std::vector<double> out(g.begin(), g.end());
  if (peak == 0.0) return out;
  for (double& v : out) v /= peak;
  return out;
}

Rgb heatmap_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::abs(v))));
  if (v >= 0.0) return {fade, fade, 255};
  return {255, fade, fade};
}

double heatmap_value(Rgb color) {
  if (color[2] == 255 && color[0] != 255) return 1.0 - color[0] / 255.0;
  if (color[0] == 255 && color[2] != 255) return -(1.0 - color[1] / 255.0);
  return 0.0;
}

RgbImage render_heatmap(const EpisodeTrace& trace, int vscale, std::span<const std::string> exclude) {
  if (trace.steps.empty()) throw Error(ErrorCode::kEmptyInput, "cannot render an empty trace");
  if (vscale < 1) throw Error(ErrorCode::kInvalidArgument, "vertical scale must be at least 1");

  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < trace.features.size(); ++f) {
    if (std::find(exclude.begin(), exclude.end(), trace.features[f]) == exclude.end()) kept.push_back(f);
  }
  if (kept.empty()) throw Error(ErrorCode::kInvalidArgument, "every feature was excluded");

  RgbImage image;
  image.width = static_cast<int>(trace.steps.size());
  image.height = static_cast<int>(kept.size()) * vscale;
  image.pixels.assign(static_cast<std::size_t>(image.width) * image.height * 3, 255);

  std::vector<double> column(kept.size());
  for (int x = 0; x < image.width; ++x) {
    const auto& g = trace.steps[x].g;
    if (!g) continue;
    if (g->size() != trace.features.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "trace column has wrong number of features");
    }
    for (std::size_t k = 0; k < kept.size(); ++k) column[k] = (*g)[kept[k]];
    const auto normalized = normalize_column(column);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const Rgb color = heatmap_color(normalized[k]);
      for (int r = 0; r < vscale; ++r) image.set(x, static_cast<int>(k) * vscale + r, color);
    }
  }
  return image;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write image " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image " + path.string());
  std::string magic;
  int maxval = 0;
  RgbImage image;
  in >> magic >> image.width >> image.height >> maxval;
  if (!in || magic != "P6" || maxval != 255 || image.width < 0 || image.height < 0) {
    throw Error(ErrorCode::kCorruptFile, "not an 8-bit binary PPM: " + path.string());
  }
  in.get();  // single whitespace before the raster
  image.pixels.resize(static_cast<std::size_t>(image.width) * image.height * 3);
  in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
    throw Error(ErrorCode::kCorruptFile, "truncated PPM raster: " + path.string());
  }
  return image;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_trace_csv(const EpisodeTrace& trace, std::ostream& out) {
  out << "step,distance_to_risk,capped";
  for (const auto& f : trace.features) out << ",g_" << f;
  out << '\n';
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& step = trace.steps[t];
    out << t << ',' << step.distance.hops << ',' << (step.distance.capped ? "true" : "false");
    for (std::size_t f = 0; f < trace.features.size(); ++f) {
      out << ',';
      if (step.g) out << format_double(step.g->at(f));
    }
    out << '\n';
  }
}

void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path) {
  if (trace.steps.empty()) throw Error(ErrorCode::kEmptyInput, "cannot write an empty trace");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write trace " + path.string());
  write_trace_csv(trace, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

EpisodeTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "trace CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "step" || header[1] != "distance_to_risk" ||
      header[2] != "capped") {
    throw Error(ErrorCode::kParse, "unexpected trace CSV header", 1);
  }
  EpisodeTrace trace;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].rfind("g_", 0) != 0) throw Error(ErrorCode::kParse, "g columns must start with g_", 1);
    trace.features.push_back(header[i].substr(2));
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw Error(ErrorCode::kParse, "wrong number of cells", lineno);
    TraceStep step;
    try {
      step.distance.hops = std::stoi(cells[1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "distance_to_risk is not an integer", lineno);
    }
    if (cells[2] != "true" && cells[2] != "false") {
      throw Error(ErrorCode::kParse, "capped must be true or false", lineno);
    }
    step.distance.capped = cells[2] == "true";
    if (step.distance.capped) trace.cap = std::max(trace.cap, step.distance.hops);

    const bool any = std::any_of(cells.begin() + 3, cells.end(), [](const auto& c) { return !c.empty(); });
    if (any) {
      std::vector<double> g;
      for (std::size_t i = 3; i < cells.size(); ++i) {
        try {
          std::size_t used = 0;
          g.push_back(std::stod(cells[i], &used));
          if (used != cells[i].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw Error(ErrorCode::kParse, "bad g value '" + cells[i] + "'", lineno);
        }
      }
      step.g = std::move(g);
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

EpisodeTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trace " + path.string());
  return read_trace_csv(in);
}

}  // namespace risklens
