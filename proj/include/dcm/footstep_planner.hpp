#ifndef DCM_FOOTSTEP_PLANNER_HPP
#define DCM_FOOTSTEP_PLANNER_HPP

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dcm/model.hpp"

namespace dcm {

enum class Side { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

/// +1 for the left foot, -1 for the right foot.
inline double side_sign(Side s) { return s == Side::Left ? 1.0 : -1.0; }

inline const char* to_string(Side s) { return s == Side::Left ? "L" : "R"; }

/// Unit vector pointing to the left of a heading.
inline PlanarVec lateral_unit(double yaw) { return {-std::sin(yaw), std::cos(yaw)}; }

inline PlanarVec heading_unit(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

/**
 * A planned foot placement.
 *
 * impact_time is the touchdown instant (start of the double support that
 * follows the swing); step_duration is the time since the previous touchdown.
 * The two footsteps of the initial stance both have impact_time 0 and
 * step_duration 0.
 */
struct Footstep
{
  int index = 0;
  Side side = Side::Left;
  PlanarVec position = PlanarVec::Zero();
  double yaw = 0.0;
  double impact_time = 0.0;
  double step_duration = 0.0;
};

struct UnicycleParams
{
  double foot_lateral_offset = 0.08;
  double nominal_step_duration = 0.53;
  double T_min = 0.30;
  double T_max = 1.0;
  double L_min = 0.0;
  double L_max = 0.25;
  double max_yaw_rate = 1.0;

  void validate() const;
};

struct StraightLine
{
  double length = 0.0;
  double speed = 0.28;
};

/// Arc starting at the origin heading +x; a positive angle turns left.
struct CircularArc
{
  double radius = 1.0;
  double arc_angle = 0.0;
  double speed = 0.28;
};

using PathSpec = std::variant<StraightLine, CircularArc>;

struct UnicyclePose
{
  PlanarVec position = PlanarVec::Zero();
  double yaw = 0.0;
  double time = 0.0;
};

class PlanningError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Pose of the unicycle at time t along the path (clamped to the path end).
UnicyclePose unicycle_pose(const PathSpec& path, double t);

double path_duration(const PathSpec& path);

/// Poses at the uniform impact-time grid k * nominal_step_duration, plus the path end.
std::vector<UnicyclePose> sample_unicycle(const PathSpec& path, const UnicycleParams& params);

/**
 * Alternating footsteps offset laterally from the unicycle samples.
 *
 * Feasibility repair is greedy: step durations are clamped into
 * [T_min, T_max]; steps longer than L_max are subdivided; steps shorter than
 * L_min are merged with the following sample. A closing step brings the feet
 * together at the final pose.
 */
std::vector<Footstep> plan_footsteps(std::span<const UnicyclePose> samples, const UnicycleParams& params);

/// Point on the unicycle axle that a footstep was generated from.
PlanarVec unicycle_anchor(const Footstep& step, double foot_lateral_offset);

/// Axle displacement between two footsteps; the quantity bounded by [L_min, L_max].
double step_length(const Footstep& from, const Footstep& to, double foot_lateral_offset);

/// Position of `target` expressed in the frame of `stance` (x forward, y left).
PlanarVec in_foot_frame(const Footstep& stance, const PlanarVec& target);

} // namespace dcm

#endif // DCM_FOOTSTEP_PLANNER_HPP
