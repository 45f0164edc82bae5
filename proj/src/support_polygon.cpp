#include "dcm/support_polygon.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dcm {

namespace {

double cross(const PlanarVec& o, const PlanarVec& a, const PlanarVec& b)
{
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

PlanarVec closest_on_segment(const PlanarVec& a, const PlanarVec& b, const PlanarVec& p)
{
  const PlanarVec ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0)
    return a;
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + s * ab;
}

} // namespace

std::vector<PlanarVec> foot_corners(const Footstep& foot, const FootShape& shape)
{
  const double half_length = std::max(0.0, 0.5 * shape.length - shape.cop_margin);
  const double half_width = std::max(0.0, 0.5 * shape.width - shape.cop_margin);
  const PlanarVec f = half_length * heading_unit(foot.yaw);
  const PlanarVec l = half_width * lateral_unit(foot.yaw);
  const PlanarVec& c = foot.position;
  return {c + f + l, c - f + l, c - f - l, c + f - l};
}

std::vector<PlanarVec> convex_hull(std::vector<PlanarVec> points)
{
  std::sort(points.begin(), points.end(), [](const PlanarVec& a, const PlanarVec& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3)
    return points;

  std::vector<PlanarVec> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0)
      --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0)
      --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool polygon_contains(std::span<const PlanarVec> poly, const PlanarVec& p, double tol)
{
  if (poly.size() < 3)
    return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const PlanarVec& a = poly[i];
    const PlanarVec& b = poly[(i + 1) % poly.size()];
    const double edge = (b - a).norm();
    if (cross(a, b, p) < -tol * edge)
      return false;
  }
  return true;
}

PlanarVec project_to_polygon(std::span<const PlanarVec> poly, const PlanarVec& p)
{
  if (poly.empty())
    throw std::invalid_argument("project_to_polygon: empty polygon");
  if (poly.size() == 1)
    return poly[0];
  if (polygon_contains(poly, p, 0.0))
    return p;

  PlanarVec best = poly[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const PlanarVec q = closest_on_segment(poly[i], poly[(i + 1) % poly.size()], p);
    const double d = (q - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

} // namespace dcm
