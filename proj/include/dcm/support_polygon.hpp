#ifndef DCM_SUPPORT_POLYGON_HPP
#define DCM_SUPPORT_POLYGON_HPP

#include <span>
#include <vector>

#include "dcm/footstep_planner.hpp"
#include "dcm/model.hpp"

namespace dcm {

/**
 * Rectangular sole centered on the footstep position, length along the foot
 * heading. The usable center-of-pressure region is the sole shrunk by
 * cop_margin on every side: a CoP on the very edge would tip the foot.
 */
struct FootShape
{
  double length = 0.19;
  double width = 0.09;
  double cop_margin = 0.0;
};

/// Corners of the usable CoP rectangle, counter-clockwise.
std::vector<PlanarVec> foot_corners(const Footstep& foot, const FootShape& shape);

/// Convex hull, counter-clockwise, without collinear points (monotone chain).
std::vector<PlanarVec> convex_hull(std::vector<PlanarVec> points);

bool polygon_contains(std::span<const PlanarVec> ccw_polygon, const PlanarVec& p, double tol = 1e-12);

/// Closest point of a convex counter-clockwise polygon to p (p itself when inside).
PlanarVec project_to_polygon(std::span<const PlanarVec> ccw_polygon, const PlanarVec& p);

} // namespace dcm

#endif // DCM_SUPPORT_POLYGON_HPP
