#include "dcm/swing_trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace dcm {

PlanarVec SwingProfile::position(double t) const
{
  return xy.position(std::clamp(t, 0.0, duration));
}

PlanarVec SwingProfile::velocity(double t) const
{
  if (t <= 0.0 || t >= duration)
    return PlanarVec::Zero();
  return xy.velocity(t);
}

double SwingProfile::height(double t) const
{
  t = std::clamp(t, 0.0, duration);
  const double z = t < apex_time ? rise.position(t) : fall.position(t - apex_time);
  return std::max(0.0, z);
}

double SwingProfile::vertical_velocity(double t) const
{
  if (t <= 0.0 || t >= duration)
    return 0.0;
  return t < apex_time ? rise.velocity(t) : fall.velocity(t - apex_time);
}

SwingProfile make_swing(const PlanarVec& start, const PlanarVec& end, double duration, double apex_height)
{
  if (!(duration > 0))
    throw std::invalid_argument("make_swing: duration must be positive");
  if (!(apex_height >= 0))
    throw std::invalid_argument("make_swing: apex height must be non-negative");

  SwingProfile s;
  s.start = start;
  s.end = end;
  s.duration = duration;
  s.apex_height = apex_height;
  s.apex_time = 0.5 * duration;
  s.xy = HermiteCubic<PlanarVec>::make(start, PlanarVec::Zero(), end, PlanarVec::Zero(), duration);
  s.rise = HermiteCubic<double>::make(0.0, 0.0, apex_height, 0.0, s.apex_time);
  s.fall = HermiteCubic<double>::make(apex_height, 0.0, 0.0, 0.0, duration - s.apex_time);
  return s;
}

SwingProfile retime_swing(const SwingProfile& current, double t_now, const PlanarVec& new_end, double remaining)
{
  if (!(remaining > 0))
    throw std::invalid_argument("retime_swing: remaining time must be positive");

  const PlanarVec p0 = current.position(t_now);
  const PlanarVec v0 = current.velocity(t_now);
  const double z0 = current.height(t_now);
  const double vz0 = current.vertical_velocity(t_now);

  SwingProfile s;
  s.start = p0;
  s.end = new_end;
  s.duration = remaining;
  s.apex_height = current.apex_height;
  s.xy = HermiteCubic<PlanarVec>::make(p0, v0, new_end, PlanarVec::Zero(), remaining);

  if (t_now < current.apex_time) {
    // keep the apex at the same fraction of the whole swing
    const double fraction = current.apex_time / current.duration;
    const double total = t_now + remaining;
    s.apex_time = std::clamp(fraction * total - t_now, 0.0, remaining);
  }
  if (s.apex_time > 0.0 && s.apex_time < remaining) {
    s.rise = HermiteCubic<double>::make(z0, vz0, s.apex_height, 0.0, s.apex_time);
    s.fall = HermiteCubic<double>::make(s.apex_height, 0.0, 0.0, 0.0, remaining - s.apex_time);
  } else {
    s.apex_time = 0.0;
    s.rise = HermiteCubic<double>::make(z0, vz0, z0, vz0, remaining);
    s.fall = HermiteCubic<double>::make(z0, vz0, 0.0, 0.0, remaining);
  }
  return s;
}

} // namespace dcm
