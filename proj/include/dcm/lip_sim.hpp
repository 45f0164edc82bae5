#ifndef DCM_LIP_SIM_HPP
#define DCM_LIP_SIM_HPP

#include <span>
#include <string>
#include <vector>

#include "dcm/dcm_controller.hpp"
#include "dcm/dcm_planner.hpp"
#include "dcm/footstep_planner.hpp"
#include "dcm/model.hpp"
#include "dcm/step_adapter.hpp"
#include "dcm/support_polygon.hpp"
#include "dcm/swing_trajectory.hpp"

namespace dcm {

/// External force applied on [t_start, t_start + duration).
struct PushEvent
{
  double t_start = 0.0;
  double duration = 0.0;
  PlanarVec force = PlanarVec::Zero();

  void validate() const;
  bool active_at(double t) const { return t >= t_start && t < t_start + duration; }
};

PlanarVec total_push(std::span<const PushEvent> pushes, double t);

enum class PhaseKind { DoubleSupport = 0, SingleSupport = 1 };

/**
 * Gait phase at some instant. In single support `stance` indexes the stance
 * footstep; in double support `stance` is the footstep that just landed and
 * `stance - 1` the other foot.
 */
struct Phase
{
  PhaseKind kind = PhaseKind::DoubleSupport;
  std::size_t stance = 1;
  double elapsed = 0.0;
  double duration = 0.0;  // infinite for the final standing phase
};

/// Phase at absolute time t for footsteps with touchdown times t_k and double support d.
Phase phase_at(std::span<const Footstep> footsteps, double ds_duration, double t);

struct SimState
{
  double time = 0.0;
  DcmState dcm;
  Phase phase;
  PlanarVec swing_position = PlanarVec::Zero();
  double swing_height = 0.0;
};

/**
 * Advance the plant by dt with RK4 under a VRP held constant over the step:
 *   xi_dot = (xi - vrp)/b + (b/m) f(t),   x_dot = (xi - x)/b.
 * Pushes are piecewise constant, so the step is split at their on/off edges
 * and each piece is integrated with the force it actually sees. Only time and
 * dynamics are advanced; gait bookkeeping belongs to the caller.
 */
SimState step_sim(const SimState& state, const PlanarVec& vrp_cmd, std::span<const PushEvent> pushes, double dt,
                  const LipParams& params);

struct FallCheck
{
  double fall_radius = 0.5;
  int kinematic_violation_cycles = 3;
};

/// DCM distance from the support center beyond the fall radius, or a persistent kinematic violation.
bool detect_fall(const SimState& state, const PlanarVec& support_center, int consecutive_violations,
                 const FallCheck& check);

/// Everything a closed-loop run needs besides the footstep plan.
struct SimSettings
{
  LipParams params;
  ControllerGains gains;
  AdapterConfig adapter;
  bool adapter_enabled = true;
  double ds_duration = 0.106;
  /// standing weight shift before the first lift-off; footstep times are delayed by this much
  double initial_transfer = 0.5;
  double dt = 0.01;
  double settle_time = 1.0;
  double apex_height = 0.03;
  FallCheck fall;
  FootShape foot{0.19, 0.09, 0.015};
  /// clamp the commanded VRP into the current support polygon
  bool clamp_vrp = true;
  /// position/timing change above which a footstep counts as adapted
  double adapted_threshold = 1e-3;
  std::vector<PushEvent> pushes;

  void validate() const;
};

struct TrajectorySample
{
  double t = 0.0;
  PlanarVec xi = PlanarVec::Zero();
  PlanarVec xi_ref = PlanarVec::Zero();
  PlanarVec com = PlanarVec::Zero();
  PlanarVec zmp_ref = PlanarVec::Zero();
  PlanarVec vrp_cmd = PlanarVec::Zero();
  PlanarVec swing = PlanarVec::Zero();
  double swing_z = 0.0;
  int phase = 0;        // PhaseKind value
  int stance_side = 0;  // +1 left, -1 right, 0 in double support
  PlanarVec push = PlanarVec::Zero();
};

struct FootprintRecord
{
  int index = 0;
  Side side = Side::Left;
  PlanarVec nominal = PlanarVec::Zero();
  double nominal_yaw = 0.0;
  double nominal_impact_t = 0.0;
  PlanarVec adapted = PlanarVec::Zero();
  double adapted_impact_t = 0.0;
  bool was_adapted = false;
};

struct SimLog
{
  std::vector<TrajectorySample> samples;
  std::vector<FootprintRecord> footprints;
  bool fell = false;
  double fall_time = 0.0;
  std::string fall_reason;
  std::size_t adapter_cycles = 0;
  std::size_t adapter_failures = 0;
  /// wall time of adapter build + QP solve + replan, per adapter cycle
  double mean_cycle_ms = 0.0;
  std::vector<std::string> diagnostics;
};

/// Footprint table with the was_adapted flag set against `threshold`.
std::vector<FootprintRecord> compare_footprints(std::span<const Footstep> nominal, std::span<const Footstep> adapted,
                                                double threshold);

/// Footsteps delayed by the initial transfer, as the simulator executes them.
std::vector<Footstep> delay_footsteps(std::span<const Footstep> footsteps, double delay);

/**
 * Closed loop: each control cycle reads the DCM, runs the step adapter in
 * single support (replanning on success), evaluates the plan, computes the
 * VRP command and integrates the plant. Runs until the plan has finished
 * plus settle_time, or until a fall. Time 0 is the start of the initial
 * transfer; logged footprint times include that delay.
 */
SimLog run_closed_loop(std::span<const Footstep> footsteps, const SimSettings& settings);

} // namespace dcm

#endif // DCM_LIP_SIM_HPP
