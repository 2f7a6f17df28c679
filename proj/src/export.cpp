#include "afdi/export.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace afdi {

BoundaryLoop boundary_loop(const CCG& Z, const std::vector<int>& coords, int n_rays,
                           const std::string& label, const SolveOptions& opts) {
  if (coords.size() != 2)
    throw std::invalid_argument("boundary_loop: only planar (2-coordinate) export supported");
  if (n_rays < 3) throw std::invalid_argument("boundary_loop: need at least 3 rays");

  const CCG P = project(Z, coords);
  Eigen::VectorXd anchor = P.c;
  if (!definitely(contains(P, anchor, opts))) {
    const auto fp = feasible_point(P, opts);
    if (!fp) throw std::runtime_error("boundary_loop: projected set is empty");
    anchor = *fp;
  }

  BoundaryLoop loop;
  loop.label = label;
  loop.points.reserve(n_rays);
  for (int k = 0; k < n_rays; ++k) {
    const double phi = 2.0 * M_PI * k / n_rays;
    Eigen::VectorXd d(2);
    d << std::cos(phi), std::sin(phi);
    const RayResult r = ray_max(P, anchor, d, opts);
    if (r.status != SolveStatus::Optimal)
      throw std::runtime_error("boundary_loop: unbounded or failed ray");
    loop.points.emplace_back(anchor + r.t * d);
  }
  return loop;
}

std::string loops_to_csv(const std::vector<BoundaryLoop>& loops) {
  std::ostringstream os;
  os.precision(12);
  os << "mode,x,y\n";
  for (const auto& loop : loops)
    for (const auto& p : loop.points) os << loop.label << "," << p.x() << "," << p.y() << "\n";
  return os.str();
}

std::string loops_to_svg(const std::vector<BoundaryLoop>& loops, int size_px) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_y;
  for (const auto& loop : loops)
    for (const auto& p : loop.points) {
      lo_x = std::min(lo_x, p.x());
      hi_x = std::max(hi_x, p.x());
      lo_y = std::min(lo_y, p.y());
      hi_y = std::max(hi_y, p.y());
    }
  if (!(lo_x <= hi_x)) {  // no points at all
    lo_x = lo_y = 0.0;
    hi_x = hi_y = 1.0;
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 0.05 * size_px;
  const double scale = (size_px - 2.0 * margin) / span;
  auto sx = [&](double x) { return margin + (x - lo_x) * scale; };
  auto sy = [&](double y) { return size_px - margin - (y - lo_y) * scale; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  constexpr int n_colors = 5;

  std::ostringstream os;
  os.precision(8);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
     << size_px << "\" viewBox=\"0 0 " << size_px << " " << size_px << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int idx = 0;
  for (const auto& loop : loops) {
    const char* color = palette[idx % n_colors];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : loop.points) os << sx(p.x()) << "," << sy(p.y()) << " ";
    if (!loop.points.empty())
      os << sx(loop.points.front().x()) << "," << sy(loop.points.front().y());
    os << "\"/>\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin + 16.0 * (idx + 1)
       << "\" fill=\"" << color << "\" font-size=\"14\">" << loop.label << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace afdi
