#include "dcm/footstep_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcm {

namespace {

constexpr double kTimeEps = 1e-9;

double arc_length(const PathSpec& path)
{
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StraightLine>)
          return p.length;
        else
          return p.radius * std::abs(p.arc_angle);
      },
      path);
}

double path_speed(const PathSpec& path)
{
  return std::visit([](const auto& p) { return p.speed; }, path);
}

void validate_path(const PathSpec& path, const UnicycleParams& params)
{
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if (!(p.speed > 0))
          throw std::invalid_argument("path: speed must be positive");
        if constexpr (std::is_same_v<T, StraightLine>) {
          if (!(p.length >= 0))
            throw std::invalid_argument("path: length must be non-negative");
        } else {
          if (!(p.radius > 0))
            throw std::invalid_argument("path: radius must be positive");
          if (!std::isfinite(p.arc_angle))
            throw std::invalid_argument("path: arc angle must be finite");
          if (p.arc_angle != 0.0 && p.speed / p.radius > params.max_yaw_rate)
            throw PlanningError("path: arc requires yaw rate " + std::to_string(p.speed / p.radius) +
                                " rad/s above max_yaw_rate " + std::to_string(params.max_yaw_rate));
        }
      },
      path);
}

Footstep make_step(Side side, const PlanarVec& axle, double yaw, double offset)
{
  Footstep f;
  f.side = side;
  f.yaw = yaw;
  f.position = axle + side_sign(side) * offset * lateral_unit(yaw);
  return f;
}

} // namespace

void UnicycleParams::validate() const
{
  if (!(foot_lateral_offset > 0))
    throw std::invalid_argument("UnicycleParams: foot_lateral_offset must be positive");
  if (!(T_min > 0 && T_min <= nominal_step_duration && nominal_step_duration <= T_max))
    throw std::invalid_argument("UnicycleParams: require 0 < T_min <= nominal_step_duration <= T_max");
  if (!(L_min >= 0 && L_min < L_max))
    throw std::invalid_argument("UnicycleParams: require 0 <= L_min < L_max");
  if (!(max_yaw_rate > 0))
    throw std::invalid_argument("UnicycleParams: max_yaw_rate must be positive");
}

double path_duration(const PathSpec& path) { return arc_length(path) / path_speed(path); }

UnicyclePose unicycle_pose(const PathSpec& path, double t)
{
  const double t_end = path_duration(path);
  const bool at_end = t >= t_end;
  t = std::clamp(t, 0.0, t_end);
  return std::visit(
      [&](const auto& p) -> UnicyclePose {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StraightLine>) {
          const double s = at_end ? p.length : p.speed * t;
          return {PlanarVec(s, 0.0), 0.0, t};
        } else {
          const double sgn = p.arc_angle < 0 ? -1.0 : 1.0;
          const double theta = at_end ? p.arc_angle : sgn * p.speed * t / p.radius;
          return {PlanarVec(p.radius * std::sin(std::abs(theta)), sgn * p.radius * (1.0 - std::cos(theta))), theta, t};
        }
      },
      path);
}

std::vector<UnicyclePose> sample_unicycle(const PathSpec& path, const UnicycleParams& params)
{
  params.validate();
  validate_path(path, params);

  const double t_end = path_duration(path);
  std::vector<UnicyclePose> out;
  out.push_back(unicycle_pose(path, 0.0));
  if (t_end <= kTimeEps)
    return out;

  for (int k = 1;; ++k) {
    const double t = k * params.nominal_step_duration;
    if (t >= t_end - kTimeEps)
      break;
    out.push_back(unicycle_pose(path, t));
  }
  out.push_back(unicycle_pose(path, t_end));
  return out;
}

PlanarVec unicycle_anchor(const Footstep& step, double foot_lateral_offset)
{
  return step.position - side_sign(step.side) * foot_lateral_offset * lateral_unit(step.yaw);
}

double step_length(const Footstep& from, const Footstep& to, double foot_lateral_offset)
{
  return (unicycle_anchor(to, foot_lateral_offset) - unicycle_anchor(from, foot_lateral_offset)).norm();
}

PlanarVec in_foot_frame(const Footstep& stance, const PlanarVec& target)
{
  const PlanarVec d = target - stance.position;
  return {heading_unit(stance.yaw).dot(d), lateral_unit(stance.yaw).dot(d)};
}

std::vector<Footstep> plan_footsteps(std::span<const UnicyclePose> samples, const UnicycleParams& params)
{
  params.validate();
  if (samples.empty())
    throw PlanningError("plan_footsteps: no unicycle samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].time > samples[i - 1].time))
      throw PlanningError("plan_footsteps: samples must be strictly ordered in time");

  const double offset = params.foot_lateral_offset;
  auto clamp_duration = [&](double dt) { return std::clamp(dt, params.T_min, params.T_max); };

  std::vector<Footstep> steps;
  steps.push_back(make_step(Side::Left, samples[0].position, samples[0].yaw, offset));
  steps.push_back(make_step(Side::Right, samples[0].position, samples[0].yaw, offset));

  double t = 0.0;
  Side swing = Side::Left;
  auto emit = [&](const PlanarVec& axle, double yaw, double duration) {
    t += duration;
    Footstep f = make_step(swing, axle, yaw, offset);
    f.impact_time = t;
    f.step_duration = duration;
    steps.push_back(f);
    swing = opposite(swing);
  };

  const UnicyclePose* prev = &samples[0];
  std::size_t i = 1;
  while (i < samples.size()) {
    const UnicyclePose* cand = &samples[i];
    double len = (cand->position - prev->position).norm();
    while (len < params.L_min && i + 1 < samples.size()) {
      cand = &samples[++i];
      len = (cand->position - prev->position).norm();
      if (cand->time - prev->time > params.T_max + kTimeEps)
        throw PlanningError("plan_footsteps: step shorter than L_min cannot be merged within T_max");
    }
    if (len < params.L_min)
      throw PlanningError("plan_footsteps: final step shorter than L_min");

    const double dt = cand->time - prev->time;
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / params.L_max - 1e-12)));
    for (int k = 1; k <= pieces; ++k) {
      const double s = static_cast<double>(k) / pieces;
      const PlanarVec axle = k == pieces ? cand->position : PlanarVec(prev->position + s * (cand->position - prev->position));
      const double yaw = k == pieces ? cand->yaw : prev->yaw + s * (cand->yaw - prev->yaw);
      emit(axle, yaw, clamp_duration(dt / pieces));
    }
    prev = cand;
    ++i;
  }

  if (samples.size() > 1)
    emit(prev->position, prev->yaw, clamp_duration(params.nominal_step_duration));

  for (std::size_t k = 0; k < steps.size(); ++k)
    steps[k].index = static_cast<int>(k);
  return steps;
}

} // namespace dcm
