#ifndef DCM_DCM_PLANNER_HPP
#define DCM_DCM_PLANNER_HPP

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "dcm/footstep_planner.hpp"
#include "dcm/model.hpp"

namespace dcm {

/// Single support DCM segment with the ZMP held at the stance-foot center.
struct SsSegment
{
  PlanarVec zmp = PlanarVec::Zero();
  PlanarVec xi_ios = PlanarVec::Zero();
  PlanarVec xi_eos = PlanarVec::Zero();
  double duration = 0.0;
};

/// Cubic DCM blend p(s) = c0 + c1 s + c2 s^2 + c3 s^3 over s in [0, duration].
struct DsSegment
{
  std::array<PlanarVec, 4> poly_coeffs{};
  double duration = 0.0;

  PlanarVec position(double s) const;
  PlanarVec velocity(double s) const;
};

struct BoundaryPair
{
  PlanarVec xi_ios;
  PlanarVec xi_eos;
};

/// Overrides the end-of-step DCM of one single support segment.
struct PinnedEos
{
  std::size_t segment = 0;
  PlanarVec xi_eos = PlanarVec::Zero();
};

/**
 * Backward recursion over N zmp points and N-1 durations:
 *   eos_{N-1} = r_N,   ios_i = r_i + e^{-T_i/b} (eos_i - r_i),   eos_{i-1} = ios_i.
 * A pinned segment uses the given eos and the recursion continues from its ios.
 */
std::vector<BoundaryPair> backward_recursion(std::span<const PlanarVec> zmp_points,
                                             std::span<const double> durations,
                                             const LipParams& params,
                                             std::optional<PinnedEos> pin = std::nullopt);

/// DCM position and velocity at local time t in [0, duration].
std::pair<PlanarVec, PlanarVec> eval_ss(const SsSegment& segment, double t, const LipParams& params);

/**
 * Cubic double support blend straddling the nominal transition: it starts at
 * prev's state ds_duration/2 before prev ends and lands on next's state
 * ds_duration/2 after next starts.
 */
DsSegment smooth_ds(const SsSegment& prev, const SsSegment& next, double ds_duration, const LipParams& params);

struct PlanSample
{
  PlanarVec xi = PlanarVec::Zero();
  PlanarVec xi_dot = PlanarVec::Zero();
  PlanarVec zmp = PlanarVec::Zero();
};

/**
 * Piecewise DCM reference over absolute time.
 *
 * For footsteps F0..F(M-1) with touchdowns t_k, the plan holds a double
 * support blend on [t_k, t_k + d] for k >= 1 and the single support segment of
 * stance F_k on [t_k + d, t_(k+1)]. Segment k's local clock starts at the
 * model transition t_k + d/2. After the last blend the DCM rests on the final
 * ZMP, the midpoint of the last two footsteps.
 */
class DcmPlan
{
public:
  struct Piece
  {
    double begin = 0.0;
    double end = 0.0;
    double origin = 0.0;  // absolute time of local time 0
    std::variant<SsSegment, DsSegment> segment;
  };

  DcmPlan(std::vector<Piece> pieces,
          std::vector<SsSegment> stance_segments,
          std::vector<PlanarVec> recursion_eos,
          PlanarVec final_zmp,
          double total_duration,
          double time_constant);

  /// Reference at absolute time t; before 0 the first piece is used, after the end the final rest state.
  PlanSample sample(double t) const;

  double total_duration() const { return total_duration_; }
  double time_constant() const { return b_; }
  const PlanarVec& final_zmp() const { return final_zmp_; }

  std::span<const Piece> pieces() const { return pieces_; }

  /// Single support segment of stance footstep k (k in [1, M-2]); index 0 and M-1 are the rest segments.
  const SsSegment& stance_segment(std::size_t k) const { return stance_segments_.at(k); }
  std::size_t num_stance_segments() const { return stance_segments_.size(); }

  /// End-of-step DCM of stance k as produced by the recursion, ignoring any pin.
  const PlanarVec& recursion_eos(std::size_t k) const { return recursion_eos_.at(k); }

private:
  std::vector<Piece> pieces_;
  std::vector<SsSegment> stance_segments_;
  std::vector<PlanarVec> recursion_eos_;
  PlanarVec final_zmp_;
  double total_duration_;
  double b_;
};

/**
 * Build the plan; `pin` refers to a stance footstep index.
 *
 * The first blend leaves the standing equilibrium. By default it lasts one
 * double support like every other blend; an earlier `plan_start` stretches it
 * into a weight shift starting at that time.
 */
DcmPlan build_plan(std::span<const Footstep> footsteps,
                   double ds_duration,
                   const LipParams& params,
                   std::optional<PinnedEos> pin = std::nullopt,
                   std::optional<double> plan_start = std::nullopt);

} // namespace dcm

#endif // DCM_DCM_PLANNER_HPP
