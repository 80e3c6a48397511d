#include "uavtrack/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace uavtrack::render {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void open_svg(std::ostringstream& out, double width, double height) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height)
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" fill=\"white\"/>\n";
}

}  // namespace

std::string top_down_svg(const env::EnvConfig& config,
                         const std::vector<agent::TrajectoryRecord>& records,
                         const SvgOptions& options) {
  const double k = options.pixels_per_unit;
  const double m = options.margin;
  const double size = config.side * k + 2 * m;
  // World y points north; SVG y points down.
  auto px = [&](double x) { return m + x * k; };
  auto py = [&](double y) { return m + (config.side - y) * k; };

  std::ostringstream out;
  open_svg(out, size, size);
  out << "<g id=\"roads\" stroke=\"#9a9a9a\" stroke-width=\"1\" stroke-dasharray=\"2,3\">\n";
  const int blocks = config.blocks_per_side();
  for (int i = 0; i <= blocks; ++i) {
    const double c = i * config.block_size;
    out << "<line x1=\"" << fmt(px(c)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(px(c))
        << "\" y2=\"" << fmt(py(config.side)) << "\"/>\n";
    out << "<line x1=\"" << fmt(px(0)) << "\" y1=\"" << fmt(py(c)) << "\" x2=\""
        << fmt(px(config.side)) << "\" y2=\"" << fmt(py(c)) << "\"/>\n";
  }
  out << "</g>\n<g id=\"obstacles\">\n";
  for (const auto& o : config.obstacles) {
    out << "<circle cx=\"" << fmt(px(o.center.x)) << "\" cy=\"" << fmt(py(o.center.y))
        << "\" r=\"" << fmt(o.radius * k)
        << "\" fill=\"#c0504d\" fill-opacity=\"0.6\" stroke=\"#7f2a28\"/>\n";
    out << "<text x=\"" << fmt(px(o.center.x)) << "\" y=\"" << fmt(py(o.center.y))
        << "\" font-size=\"11\" text-anchor=\"middle\" dominant-baseline=\"middle\">h="
        << fmt(o.height) << "</text>\n";
  }
  out << "</g>\n";

  auto polyline = [&](const char* id, const char* colour, auto point) {
    out << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto p = point(records[i]);
      out << (i ? " " : "") << fmt(px(p.x)) << ',' << fmt(py(p.y));
    }
    out << "\"/>\n";
  };
  auto marker = [&](const char* cls, const char* colour, geometry::Point2 p, bool start) {
    if (start) {
      out << "<circle class=\"" << cls << "\" cx=\"" << fmt(px(p.x)) << "\" cy=\"" << fmt(py(p.y))
          << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
    } else {
      out << "<rect class=\"" << cls << "\" x=\"" << fmt(px(p.x) - 4) << "\" y=\""
          << fmt(py(p.y) - 4) << "\" width=\"8\" height=\"8\" fill=\"" << colour << "\"/>\n";
    }
  };
  if (!records.empty()) {
    polyline("uav-path", "#1f5fbf", [](const agent::TrajectoryRecord& r) { return r.uav.ground(); });
    polyline("target-path", "#2e8b3e", [](const agent::TrajectoryRecord& r) { return r.target; });
    marker("start", "#1f5fbf", records.front().uav.ground(), true);
    marker("end", "#1f5fbf", records.back().uav.ground(), false);
    marker("start", "#2e8b3e", records.front().target, true);
    marker("end", "#2e8b3e", records.back().target, false);
  }
  out << "</svg>\n";
  return out.str();
}

std::string altitude_svg(const env::EnvConfig& config,
                         const std::vector<agent::TrajectoryRecord>& records,
                         const SvgOptions& options) {
  const double m = options.margin;
  const double width = 600.0;
  const double height = 240.0;
  const double t_end = std::max(1, records.empty() ? 1 : records.back().t);
  const double z_top = config.h_max * 1.1;
  auto px = [&](double t) { return m + t / t_end * width; };
  auto py = [&](double z) { return m + (1.0 - z / z_top) * height; };

  std::ostringstream out;
  open_svg(out, width + 2 * m, height + 2 * m);
  for (double z : {config.h_min, config.h_max}) {
    out << "<line class=\"limit\" x1=\"" << fmt(px(0)) << "\" y1=\"" << fmt(py(z)) << "\" x2=\""
        << fmt(px(t_end)) << "\" y2=\"" << fmt(py(z))
        << "\" stroke=\"#9a9a9a\" stroke-dasharray=\"4,3\"/>\n";
    out << "<text x=\"4\" y=\"" << fmt(py(z)) << "\" font-size=\"10\">" << fmt(z) << "</text>\n";
  }
  out << "<polyline id=\"altitude\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << (i ? " " : "") << fmt(px(records[i].t)) << ',' << fmt(py(records[i].uav.z));
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace uavtrack::render
