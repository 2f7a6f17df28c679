#ifndef AFDI_EXPORT_HPP_
#define AFDI_EXPORT_HPP_

#include <string>
#include <vector>

#include "afdi/queries.hpp"

namespace afdi {

/// Closed boundary polygon of a planar set projection, vertices sorted by
/// ray angle around an interior anchor.
struct BoundaryLoop {
  std::string label;
  std::vector<Eigen::Vector2d> points;
};

/// Boundary of the 2-D projection of `Z` onto `coords` (exactly two indices)
/// sampled with `n_rays` equally spaced ray_max shots from a feasible anchor.
BoundaryLoop boundary_loop(const CCG& Z, const std::vector<int>& coords, int n_rays,
                           const std::string& label = "", const SolveOptions& opts = {});

/// CSV with header "mode,x,y", one row per boundary vertex.
std::string loops_to_csv(const std::vector<BoundaryLoop>& loops);

/// Minimal standalone SVG: one closed polyline per loop plus a text legend.
std::string loops_to_svg(const std::vector<BoundaryLoop>& loops, int size_px = 600);

}  // namespace afdi

#endif  // AFDI_EXPORT_HPP_
