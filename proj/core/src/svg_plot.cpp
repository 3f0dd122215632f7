#include "hyper/svg_plot.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <cmath>
#include <cstdio>

#include "hyper/error.hpp"

namespace hyper {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double min_x, min_y, scale, pad, height;

  double sx(double x) const { return pad + (x - min_x) * scale; }
  double sy(double y) const { return height - pad - (y - min_y) * scale; }
};

std::string polyline(const Frame& f, const std::vector<Vec2>& pts, const char* color, double width) {
  if (pts.size() < 2) return {};
  std::string d;
  for (const auto& p : pts) d += num(f.sx(p.x())) + "," + num(f.sy(p.y())) + " ";
  return "<polyline points=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
         num(width) + "\"/>\n";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_scene_svg(const SceneRecord& record,
                             const std::vector<HybridSequence>& predictions,
                             const PlotOptions& options) {
  // Frame the trajectories; centerlines are clipped by the viewport.
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  auto grow = [&](const Vec2& p) {
    min_x = std::min(min_x, p.x());
    min_y = std::min(min_y, p.y());
    max_x = std::max(max_x, p.x());
    max_y = std::max(max_y, p.y());
  };
  for (const auto& p : record.observed) grow(p);
  for (const auto& p : record.future) grow(p);
  for (const auto& s : predictions) {
    for (const auto& st : s.steps) grow(st.position);
  }
  if (!std::isfinite(min_x)) min_x = min_y = max_x = max_y = 0.0;
  const double margin = 5.0;
  min_x -= margin;
  min_y -= margin;
  max_x += margin;
  max_y += margin;
  const double pad = 10.0;
  const double span = std::max(max_x - min_x, max_y - min_y);
  const double scale = (std::min(options.width, options.height) - 2 * pad) / span;
  Frame f{min_x, min_y, scale, pad, static_cast<double>(options.height)};

  const std::string w = std::to_string(options.width), h = std::to_string(options.height);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
                    "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  out += R"(<rect width="100%" height="100%" fill="white"/>)" "\n";
  out += "<clipPath id=\"view\"><rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\"/></clipPath>\n";
  out += "<g clip-path=\"url(#view)\">\n";
  for (const auto& line : record.centerlines) out += polyline(f, line, "#bbbbbb", 1.0);
  out += polyline(f, record.observed, "blue", 2.0);
  std::vector<Vec2> gt;
  if (!record.observed.empty()) gt.push_back(record.observed.back());
  gt.insert(gt.end(), record.future.begin(), record.future.end());
  out += polyline(f, gt, "cyan", 2.0);
  for (const auto& s : predictions) {
    std::vector<Vec2> pts;
    if (!record.observed.empty()) pts.push_back(record.observed.back());
    for (const auto& st : s.steps) pts.push_back(st.position);
    out += polyline(f, pts, "red", 1.2);
    for (std::size_t t = 1; t < s.steps.size(); ++t) {
      if (s.steps[t].mode == s.steps[t - 1].mode) continue;
      out += "<circle cx=\"" + num(f.sx(s.steps[t].position.x())) + "\" cy=\"" +
             num(f.sy(s.steps[t].position.y())) + "\" r=\"3\" fill=\"red\"/>\n";
    }
  }
  out += "</g>\n";
  if (!options.title.empty()) {
    out += "<text x=\"12\" y=\"22\" font-family=\"monospace\" font-size=\"14\">" +
           escape(options.title) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_scene_svg(const std::filesystem::path& path, const SceneRecord& record,
                     const std::vector<HybridSequence>& predictions, const PlotOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << render_scene_svg(record, predictions, options);
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace hyper
