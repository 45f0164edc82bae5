#include "dcm/step_adapter.hpp"

#include <cmath>
#include <stdexcept>

namespace dcm {

namespace {

Eigen::Matrix2d rotation(double yaw)
{
  return Eigen::Rotation2Dd(yaw).toRotationMatrix();
}

} // namespace

void AdapterWeights::validate() const
{
  if (!(alpha1 > 0) || !(alpha2 > 0) || !(alpha3 > 0))
    throw std::invalid_argument("AdapterWeights: all weights must be positive");
}

void AdapterBounds::validate() const
{
  if (!(rT_min.x() < rT_max.x()) || !(rT_min.y() < rT_max.y()))
    throw std::invalid_argument("AdapterBounds: rT_min must be below rT_max componentwise");
  if (!(sigma_min > 1.0))
    throw std::invalid_argument("AdapterBounds: sigma_min must exceed 1");
  if (!(sigma_min <= sigma_max))
    throw std::invalid_argument("AdapterBounds: sigma_min exceeds sigma_max");
}

void StepRegion::validate() const
{
  if (!(sagittal_max > 0))
    throw std::invalid_argument("StepRegion: sagittal_max must be positive");
  if (!(lateral_min >= 0 && lateral_min < lateral_max))
    throw std::invalid_argument("StepRegion: require 0 <= lateral_min < lateral_max");
}

std::pair<PlanarVec, PlanarVec> StepRegion::box(Side stance_side) const
{
  // the swing foot lands on the opposite side of the stance foot
  if (stance_side == Side::Right)
    return {PlanarVec(-sagittal_max, lateral_min), PlanarVec(sagittal_max, lateral_max)};
  return {PlanarVec(-sagittal_max, -lateral_max), PlanarVec(sagittal_max, -lateral_min)};
}

bool StepRegion::contains(const Footstep& stance, const PlanarVec& target, double tol) const
{
  const PlanarVec local = in_foot_frame(stance, target);
  const auto [lo, hi] = box(stance.side);
  return (local.array() >= lo.array() - tol).all() && (local.array() <= hi.array() + tol).all();
}

void AdapterConfig::validate() const
{
  weights.validate();
  region.validate();
  if (!(T_min > 0 && T_min <= T_max))
    throw std::invalid_argument("AdapterConfig: require 0 < T_min <= T_max");
  if (!(min_remaining_time > 0))
    throw std::invalid_argument("AdapterConfig: min_remaining_time must be positive");
  if (!(qp_tolerance > 0) || qp_max_iterations <= 0)
    throw std::invalid_argument("AdapterConfig: invalid QP settings");
}

QpProblem build_problem(const PlanarVec& xi_now,
                        const PlanarVec& r1,
                        const PlanarVec& r2,
                        const AdapterNominal& nominal,
                        const AdapterWeights& weights,
                        const AdapterBounds& bounds,
                        const LipParams& params)
{
  weights.validate();
  bounds.validate();
  if (!all_finite(xi_now))
    throw std::invalid_argument("build_problem: xi_now is not finite");

  const double b = params.time_constant();
  const PlanarVec delta = r2 - r1;

  QpProblem p;
  Eigen::Matrix<double, 5, 1> h;
  h << 2 * weights.alpha1, 2 * weights.alpha1, 2 * weights.alpha3, 2 * weights.alpha2, 2 * weights.alpha2;
  p.H = h.asDiagonal();

  Eigen::Matrix<double, 5, 1> z_nom;
  z_nom << nominal.rT_nom, std::exp(nominal.T_nom / b), nominal.gamma_nom;
  p.g = -(h.cwiseProduct(z_nom));

  p.A_eq = Eigen::MatrixXd::Zero(2, 5);
  p.A_eq.block<2, 2>(0, 0).setIdentity();
  p.A_eq.block<2, 1>(0, 2) = r2 - xi_now - delta / 2;
  p.A_eq.block<2, 2>(0, 3).setIdentity();
  p.b_eq = r1 + delta / 2;

  p.A_in = Eigen::MatrixXd::Zero(6, 5);
  p.b_in.resize(6);
  p.A_in(0, 0) = 1;
  p.A_in(1, 1) = 1;
  p.A_in(2, 0) = -1;
  p.A_in(3, 1) = -1;
  p.A_in(4, 2) = 1;
  p.A_in(5, 2) = -1;
  p.b_in << bounds.rT_max, -bounds.rT_min, bounds.sigma_max, -bounds.sigma_min;
  return p;
}

AdapterSolution decode_solution(const QpSolution& qp, const LipParams& params)
{
  AdapterSolution s;
  s.status = qp.status;
  s.kkt_residual = qp.kkt_residual;
  s.iterations = qp.iterations;
  if (qp.z.size() != 5)
    return s;
  s.rT = qp.z.segment<2>(0);
  s.sigma = qp.z(2);
  s.gammaT = qp.z.segment<2>(3);
  s.xiT = s.gammaT + s.rT;
  s.T_adapted = s.sigma > 0 ? params.time_constant() * std::log(s.sigma) : 0.0;
  return s;
}

StepAdapter::StepAdapter(AdapterConfig config, LipParams params)
  : config_(std::move(config)), params_(params)
{
  config_.validate();
}

std::pair<AdapterNominal, AdapterBounds> StepAdapter::cycle_targets(const StanceContext& ctx) const
{
  const double b = params_.time_constant();
  // T counts to the model transition, which lies ds/2 after touchdown
  const double floor_T = config_.min_remaining_time + 0.5 * ctx.ds_duration;
  auto remaining = [&](double step_time) { return std::max(step_time - ctx.elapsed, floor_T); };

  const Eigen::Matrix2d R = rotation(ctx.stance.yaw);
  AdapterNominal nominal;
  nominal.rT_nom = R.transpose() * (ctx.rT_nom - ctx.stance.position);
  nominal.gamma_nom = R.transpose() * ctx.gamma_nom;
  nominal.T_nom = remaining(ctx.T_step_nom);

  AdapterBounds bounds;
  std::tie(bounds.rT_min, bounds.rT_max) = config_.region.box(ctx.stance.side);
  bounds.sigma_min = std::exp(remaining(config_.T_min) / b);
  bounds.sigma_max = std::exp(remaining(config_.T_max) / b);
  return {nominal, bounds};
}

AdapterSolution StepAdapter::adapt(const PlanarVec& xi_now, const StanceContext& ctx)
{
  const Eigen::Matrix2d R = rotation(ctx.stance.yaw);
  const PlanarVec& origin = ctx.stance.position;
  const auto [nominal, bounds] = cycle_targets(ctx);

  // fixed ZMP at the stance-foot center, which is the frame origin
  const PlanarVec xi_local = R.transpose() * (xi_now - origin);
  const QpProblem qp = build_problem(xi_local, PlanarVec::Zero(), PlanarVec::Zero(), nominal, config_.weights, bounds, params_);

  const QpSolution raw = solver_.solve(qp, last_active_, config_.qp_tolerance, config_.qp_max_iterations);
  AdapterSolution s = decode_solution(raw, params_);
  if (s.status != QpStatus::Optimal)
    return s;

  last_active_ = raw.active_set;
  s.rT = origin + R * s.rT;
  s.gammaT = R * s.gammaT;
  s.xiT = s.rT + s.gammaT;
  return s;
}

ReplanResult replan_after_adapt(const AdapterSolution& solution,
                                std::span<const Footstep> footsteps,
                                std::size_t stance_index,
                                double now,
                                double ds_duration,
                                const LipParams& params,
                                std::optional<double> plan_start)
{
  if (stance_index < 1 || stance_index + 1 >= footsteps.size())
    throw std::out_of_range("replan_after_adapt: stance index has no next footstep");
  if (!(solution.T_adapted > 0.5 * ds_duration))
    throw std::invalid_argument("replan_after_adapt: adapted touchdown is not in the future");

  std::vector<Footstep> steps(footsteps.begin(), footsteps.end());
  Footstep& next = steps[stance_index + 1];
  const double impact = now + solution.T_adapted - 0.5 * ds_duration;
  const double shift = impact - next.impact_time;
  next.position = solution.rT;
  next.impact_time = impact;
  next.step_duration = impact - steps[stance_index].impact_time;
  for (std::size_t k = stance_index + 2; k < steps.size(); ++k)
    steps[k].impact_time += shift;

  DcmPlan plan = build_plan(steps, ds_duration, params, PinnedEos{stance_index, solution.xiT}, plan_start);
  return {std::move(steps), std::move(plan)};
}

} // namespace dcm
