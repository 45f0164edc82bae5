#ifndef DCM_STEP_ADAPTER_HPP
#define DCM_STEP_ADAPTER_HPP

#include <optional>
#include <span>
#include <vector>

#include "dcm/dcm_planner.hpp"
#include "dcm/footstep_planner.hpp"
#include "dcm/model.hpp"
#include "dcm/qp_dense.hpp"

namespace dcm {

/**
 * Nominal targets for one adapter solve.
 *
 * T_nom is the nominal time left until the model transition that ends the
 * current single support segment, i.e. the horizon the QP is solved over.
 */
struct AdapterNominal
{
  PlanarVec rT_nom = PlanarVec::Zero();
  double T_nom = 0.0;
  PlanarVec gamma_nom = PlanarVec::Zero();
};

struct AdapterWeights
{
  double alpha1 = 1.0;  // next ZMP position
  double alpha2 = 5.0;  // DCM offset
  double alpha3 = 0.01; // timing, in sigma units

  void validate() const;
};

/// Box on the next ZMP and interval on sigma = e^{T/b}.
struct AdapterBounds
{
  PlanarVec rT_min = PlanarVec::Constant(-1.0);
  PlanarVec rT_max = PlanarVec::Constant(1.0);
  double sigma_min = 1.0;
  double sigma_max = 1.0;

  void validate() const;
};

struct AdapterSolution
{
  PlanarVec rT = PlanarVec::Zero();
  double sigma = 1.0;
  double T_adapted = 0.0;  // remaining time, b ln sigma
  PlanarVec gammaT = PlanarVec::Zero();
  PlanarVec xiT = PlanarVec::Zero();
  QpStatus status = QpStatus::Optimal;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/**
 * Reachable landing region of the swing foot in the stance-foot frame:
 * |x| <= sagittal_max forward/backward, lateral distance toward the swing side
 * within [lateral_min, lateral_max].
 */
struct StepRegion
{
  double sagittal_max = 0.25;
  double lateral_min = 0.07;
  double lateral_max = 0.30;

  void validate() const;

  /// Box in the stance frame for a swing foot of the side opposite to `stance_side`.
  std::pair<PlanarVec, PlanarVec> box(Side stance_side) const;

  bool contains(const Footstep& stance, const PlanarVec& target, double tol = 1e-9) const;
};

struct AdapterConfig
{
  AdapterWeights weights;
  StepRegion region;
  double T_min = 0.30;
  double T_max = 1.0;
  /// least time between a solve and the touchdown it commands
  double min_remaining_time = 0.05;
  /// re-read gamma_nom from the current plan every cycle instead of holding the step-start value
  bool refresh_gamma = true;
  double qp_tolerance = 1e-8;
  int qp_max_iterations = 200;

  void validate() const;
};

/**
 * Step adjustment QP over z = [rT(2), sigma, gammaT(2)]:
 *
 *   min  a1 |rT - rT_nom|^2 + a3 (sigma - sigma_nom)^2 + a2 |gammaT - gamma_nom|^2
 *   s.t. rT + (r2 - xi0 - delta/2) sigma + gammaT = r1 + delta/2
 *        rT_min <= rT <= rT_max,  sigma_min <= sigma <= sigma_max
 *
 * sigma_nom = e^{T_nom / b}. The objective is scaled by 2 through the Hessian
 * so the QP reads 1/2 z'Hz + g'z.
 */
QpProblem build_problem(const PlanarVec& xi_now,
                        const PlanarVec& r1,
                        const PlanarVec& r2,
                        const AdapterNominal& nominal,
                        const AdapterWeights& weights,
                        const AdapterBounds& bounds,
                        const LipParams& params);

AdapterSolution decode_solution(const QpSolution& qp, const LipParams& params);

/// Where the current single support stands and what the nominal plan expected of it.
struct StanceContext
{
  Footstep stance;
  /// time since the model transition that started this single support segment
  double elapsed = 0.0;
  /// nominal duration of the step being taken (touchdown to touchdown)
  double T_step_nom = 0.0;
  PlanarVec rT_nom = PlanarVec::Zero();
  PlanarVec gamma_nom = PlanarVec::Zero();
  double ds_duration = 0.0;
};

/**
 * Online step adapter. The QP is posed in the stance-foot frame so the
 * kinematic region is an axis-aligned box, then mapped back to world.
 * Holds a solver workspace and the last active set for warm starts; one
 * instance per control thread.
 */
class StepAdapter
{
public:
  StepAdapter(AdapterConfig config, LipParams params);

  /// Solve for the current cycle. A non-optimal status means the caller should keep its previous solution.
  AdapterSolution adapt(const PlanarVec& xi_now, const StanceContext& ctx);

  /// Bounds and nominal in the stance frame for the current cycle (exposed for testing).
  std::pair<AdapterNominal, AdapterBounds> cycle_targets(const StanceContext& ctx) const;

  const AdapterConfig& config() const { return config_; }
  const LipParams& params() const { return params_; }

  void reset_warm_start() { last_active_.clear(); }

private:
  AdapterConfig config_;
  LipParams params_;
  DenseQpSolver solver_;
  std::vector<Eigen::Index> last_active_;
};

struct ReplanResult
{
  std::vector<Footstep> footsteps;
  DcmPlan plan;
};

/**
 * Rebuild footsteps and plan after an adaptation of stance footstep k at
 * absolute time `now`. The next footstep moves to rT and lands at
 * now + T_adapted - ds/2; later footsteps keep their positions and shift in
 * time by the same amount. The current stance segment ends on xiT.
 */
ReplanResult replan_after_adapt(const AdapterSolution& solution,
                                std::span<const Footstep> footsteps,
                                std::size_t stance_index,
                                double now,
                                double ds_duration,
                                const LipParams& params,
                                std::optional<double> plan_start = std::nullopt);

} // namespace dcm

#endif // DCM_STEP_ADAPTER_HPP
