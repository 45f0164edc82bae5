#ifndef DCM_SWING_TRAJECTORY_HPP
#define DCM_SWING_TRAJECTORY_HPP

#include "dcm/model.hpp"

namespace dcm {

/// Cubic Hermite on [0, T] given end values and end derivatives.
template <typename Value>
struct HermiteCubic
{
  Value c0, c1, c2, c3;
  double T = 0.0;

  static HermiteCubic make(const Value& p0, const Value& v0, const Value& p1, const Value& v1, double T)
  {
    HermiteCubic h{p0, v0, (3.0 * (p1 - p0) - (2.0 * v0 + v1) * T) / (T * T),
                   (2.0 * (p0 - p1) + (v0 + v1) * T) / (T * T * T), T};
    return h;
  }

  Value position(double s) const { return c0 + s * (c1 + s * (c2 + s * c3)); }
  Value velocity(double s) const { return c1 + s * (2.0 * c2 + s * 3.0 * c3); }
};

/**
 * Swing foot path: xy is one cubic with zero velocity at touchdown; z rises to
 * the apex and falls back to the ground as two cubics joined at apex_time.
 * After a late retime the rise piece may be absent (apex_time = 0).
 */
struct SwingProfile
{
  PlanarVec start = PlanarVec::Zero();
  PlanarVec end = PlanarVec::Zero();
  double duration = 0.0;
  double apex_height = 0.0;
  double apex_time = 0.0;

  HermiteCubic<PlanarVec> xy;
  HermiteCubic<double> rise;
  HermiteCubic<double> fall;

  PlanarVec position(double t) const;
  PlanarVec velocity(double t) const;
  double height(double t) const;
  double vertical_velocity(double t) const;
};

/// Lift-off at start, apex at half time, touchdown at end, zero velocities at both ends.
SwingProfile make_swing(const PlanarVec& start, const PlanarVec& end, double duration, double apex_height);

/**
 * New profile from the state of `current` at local time t_now, landing on
 * `new_end` after `remaining` seconds. Position and velocity are continuous;
 * the apex keeps its relative place in the swing if it is still ahead.
 */
SwingProfile retime_swing(const SwingProfile& current, double t_now, const PlanarVec& new_end, double remaining);

} // namespace dcm

#endif // DCM_SWING_TRAJECTORY_HPP
