#include "dcm/lip_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace dcm {

void PushEvent::validate() const
{
  if (!(duration > 0))
    throw std::invalid_argument("PushEvent: duration must be positive");
  if (!std::isfinite(t_start) || !all_finite(force))
    throw std::invalid_argument("PushEvent: start and force must be finite");
}

PlanarVec total_push(std::span<const PushEvent> pushes, double t)
{
  PlanarVec f = PlanarVec::Zero();
  for (const auto& p : pushes)
    if (p.active_at(t))
      f += p.force;
  return f;
}

Phase phase_at(std::span<const Footstep> footsteps, double ds_duration, double t)
{
  const std::size_t M = footsteps.size();
  if (M < 2)
    throw std::invalid_argument("phase_at: need at least two footsteps");

  std::size_t k = 1;
  while (k + 1 < M && footsteps[k + 1].impact_time <= t)
    ++k;

  const double t_k = footsteps[k].impact_time;
  Phase ph;
  ph.stance = k;
  if (t < t_k + ds_duration || k + 1 == M) {
    ph.kind = PhaseKind::DoubleSupport;
    ph.elapsed = std::max(0.0, t - t_k);
    ph.duration = k + 1 == M ? std::numeric_limits<double>::infinity() : ds_duration;
  } else {
    ph.kind = PhaseKind::SingleSupport;
    ph.elapsed = t - (t_k + ds_duration);
    ph.duration = footsteps[k + 1].impact_time - (t_k + ds_duration);
  }
  return ph;
}

SimState step_sim(const SimState& state, const PlanarVec& vrp_cmd, std::span<const PushEvent> pushes, double dt,
                  const LipParams& params)
{
  if (!(dt > 0))
    throw std::invalid_argument("step_sim: dt must be positive");

  using Vec4 = Eigen::Matrix<double, 4, 1>;
  const double b = params.time_constant();

  // pushes switch on and off inside a step; integrate piecewise between their edges
  const double t0 = state.time;
  const double t1 = t0 + dt;
  std::vector<double> cuts{t0, t1};
  for (const auto& p : pushes)
    for (double edge : {p.t_start, p.t_start + p.duration})
      if (edge > t0 && edge < t1)
        cuts.push_back(edge);
  std::sort(cuts.begin(), cuts.end());

  Vec4 y;
  y << state.dcm.xi, state.dcm.com;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double h = cuts[i + 1] - cuts[i];
    if (h <= 0)
      continue;
    const PlanarVec f = total_push(pushes, 0.5 * (cuts[i] + cuts[i + 1]));
    auto rate = [&](const Vec4& x) {
      const PlanarVec xi = x.head<2>();
      const PlanarVec com = x.tail<2>();
      Vec4 dy;
      dy << dcm_rate<double>(xi, vrp_cmd, params, f), (xi - com) / b;
      return dy;
    };
    const Vec4 k1 = rate(y);
    const Vec4 k2 = rate(y + 0.5 * h * k1);
    const Vec4 k3 = rate(y + 0.5 * h * k2);
    const Vec4 k4 = rate(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  SimState next = state;
  next.time = t1;
  next.dcm.xi = y.head<2>();
  next.dcm.com = y.tail<2>();
  next.phase.elapsed += dt;
  return next;
}

bool detect_fall(const SimState& state, const PlanarVec& support_center, int consecutive_violations,
                 const FallCheck& check)
{
  if (!all_finite(state.dcm.xi))
    return true;
  if ((state.dcm.xi - support_center).norm() > check.fall_radius)
    return true;
  return consecutive_violations >= check.kinematic_violation_cycles;
}

void SimSettings::validate() const
{
  gains.validate();
  adapter.validate();
  if (!(ds_duration > 0))
    throw std::invalid_argument("SimSettings: ds_duration must be positive");
  if (!(initial_transfer >= 0))
    throw std::invalid_argument("SimSettings: initial_transfer must be non-negative");
  if (!(dt > 0))
    throw std::invalid_argument("SimSettings: dt must be positive");
  if (!(settle_time >= 0))
    throw std::invalid_argument("SimSettings: settle_time must be non-negative");
  if (!(apex_height >= 0))
    throw std::invalid_argument("SimSettings: apex_height must be non-negative");
  if (!(fall.fall_radius > 0) || fall.kinematic_violation_cycles < 1)
    throw std::invalid_argument("SimSettings: invalid fall check");
  if (!(foot.length > 0) || !(foot.width > 0))
    throw std::invalid_argument("SimSettings: foot dimensions must be positive");
  if (!(adapted_threshold > 0))
    throw std::invalid_argument("SimSettings: adapted_threshold must be positive");
  for (const auto& p : pushes)
    p.validate();
}

std::vector<FootprintRecord> compare_footprints(std::span<const Footstep> nominal, std::span<const Footstep> adapted,
                                                double threshold)
{
  if (nominal.size() != adapted.size())
    throw std::invalid_argument("compare_footprints: sequences differ in length");
  std::vector<FootprintRecord> out;
  for (std::size_t k = 0; k < nominal.size(); ++k) {
    FootprintRecord r;
    r.index = nominal[k].index;
    r.side = nominal[k].side;
    r.nominal = nominal[k].position;
    r.nominal_yaw = nominal[k].yaw;
    r.nominal_impact_t = nominal[k].impact_time;
    r.adapted = adapted[k].position;
    r.adapted_impact_t = adapted[k].impact_time;
    bool moved = (r.adapted - r.nominal).norm() > threshold;
    if (k >= 1) {
      const double nominal_dt = nominal[k].impact_time - nominal[k - 1].impact_time;
      const double adapted_dt = adapted[k].impact_time - adapted[k - 1].impact_time;
      moved = moved || std::abs(adapted_dt - nominal_dt) > threshold;
    }
    r.was_adapted = moved;
    out.push_back(r);
  }
  return out;
}

namespace {

struct SwingState
{
  std::size_t stance = 0;  // stance footstep the swing belongs to, 0 when none
  SwingProfile profile;
  double start_time = 0.0;
  PlanarVec frozen_gamma = PlanarVec::Zero();
};

std::vector<PlanarVec> support_polygon(std::span<const Footstep> steps, const Phase& ph, const FootShape& shape)
{
  if (ph.kind == PhaseKind::SingleSupport)
    return foot_corners(steps[ph.stance], shape);
  auto pts = foot_corners(steps[ph.stance], shape);
  const auto other = foot_corners(steps[ph.stance - 1], shape);
  pts.insert(pts.end(), other.begin(), other.end());
  return convex_hull(std::move(pts));
}

PlanarVec support_center(std::span<const Footstep> steps, const Phase& ph)
{
  if (ph.kind == PhaseKind::SingleSupport)
    return steps[ph.stance].position;
  return 0.5 * (steps[ph.stance].position + steps[ph.stance - 1].position);
}

} // namespace

std::vector<Footstep> delay_footsteps(std::span<const Footstep> footsteps, double delay)
{
  std::vector<Footstep> out(footsteps.begin(), footsteps.end());
  for (auto& f : out)
    f.impact_time += delay;
  return out;
}

SimLog run_closed_loop(std::span<const Footstep> footsteps, const SimSettings& settings)
{
  settings.validate();
  if (footsteps.size() < 2)
    throw std::invalid_argument("run_closed_loop: need at least the initial stance pair");

  const LipParams& params = settings.params;
  const double d = settings.ds_duration;
  const double dt = settings.dt;

  const std::vector<Footstep> nominal_footsteps = delay_footsteps(footsteps, settings.initial_transfer);
  std::vector<Footstep> steps = nominal_footsteps;
  DcmPlan plan = build_plan(steps, d, params, std::nullopt, 0.0);
  std::optional<StepAdapter> adapter;
  if (settings.adapter_enabled)
    adapter.emplace(settings.adapter, params);

  SimLog log;
  SimState state;
  const PlanarVec start = 0.5 * (steps[0].position + steps[1].position);
  state.dcm.xi = start;
  state.dcm.com = start;

  SwingState swing;
  int violations = 0;
  double cycle_seconds = 0.0;

  for (long n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (t > plan.total_duration() + settings.settle_time + 1e-9)
      break;
    state.time = t;
    state.phase = phase_at(steps, d, t);
    const Phase& ph = state.phase;

    if (ph.kind == PhaseKind::SingleSupport) {
      const std::size_t k = ph.stance;
      if (swing.stance != k) {
        const double lift = steps[k].impact_time + d;
        swing.stance = k;
        swing.start_time = lift;
        swing.profile = make_swing(steps[k - 1].position, steps[k + 1].position,
                                   steps[k + 1].impact_time - lift, settings.apex_height);
        swing.frozen_gamma = plan.recursion_eos(k) - steps[k + 1].position;
      }

      if (adapter && steps[k + 1].impact_time - t > settings.adapter.min_remaining_time) {
        StanceContext ctx;
        ctx.stance = steps[k];
        ctx.elapsed = t - (steps[k].impact_time + 0.5 * d);
        ctx.T_step_nom = nominal_footsteps[k + 1].step_duration;
        ctx.rT_nom = nominal_footsteps[k + 1].position;
        ctx.gamma_nom = settings.adapter.refresh_gamma ? PlanarVec(plan.recursion_eos(k) - steps[k + 1].position)
                                                       : swing.frozen_gamma;
        ctx.ds_duration = d;

        const auto tic = std::chrono::steady_clock::now();
        const AdapterSolution sol = adapter->adapt(state.dcm.xi, ctx);
        if (sol.status == QpStatus::Optimal) {
          auto replanned = replan_after_adapt(sol, steps, k, t, d, params, 0.0);
          steps = std::move(replanned.footsteps);
          plan = std::move(replanned.plan);
        }
        cycle_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        ++log.adapter_cycles;

        if (sol.status == QpStatus::Optimal) {
          const double remaining = steps[k + 1].impact_time - t;
          swing.profile = retime_swing(swing.profile, t - swing.start_time, steps[k + 1].position, remaining);
          swing.start_time = t;
        } else {
          ++log.adapter_failures;
          std::ostringstream msg;
          msg << "t=" << t << " step " << k + 1 << ": adapter QP " << to_string(sol.status)
              << ", keeping previous solution";
          log.diagnostics.push_back(msg.str());
        }
      }

      violations = settings.adapter.region.contains(steps[k], steps[k + 1].position, 1e-6) ? 0 : violations + 1;
      state.swing_position = swing.profile.position(t - swing.start_time);
      state.swing_height = swing.profile.height(t - swing.start_time);
    } else {
      violations = 0;
      state.swing_position = steps[ph.stance].position;
      state.swing_height = 0.0;
    }

    const PlanSample ref = plan.sample(t);
    const PlanSample ref_next = plan.sample(t + dt);
    PlanarVec vrp = vrp_command_sampled<double>(state.dcm.xi, ref.xi, ref_next.xi, dt, settings.gains, params);
    if (settings.clamp_vrp) {
      const auto poly = support_polygon(steps, ph, settings.foot);
      vrp = project_to_polygon(poly, vrp);
    }

    TrajectorySample s;
    s.t = t;
    s.xi = state.dcm.xi;
    s.xi_ref = ref.xi;
    s.com = state.dcm.com;
    s.zmp_ref = ref.zmp;
    s.vrp_cmd = vrp;
    s.swing = state.swing_position;
    s.swing_z = state.swing_height;
    s.phase = static_cast<int>(ph.kind);
    s.stance_side = ph.kind == PhaseKind::SingleSupport ? static_cast<int>(side_sign(steps[ph.stance].side)) : 0;
    s.push = total_push(settings.pushes, t);
    log.samples.push_back(s);

    if (detect_fall(state, support_center(steps, ph), violations, settings.fall)) {
      log.fell = true;
      log.fall_time = t;
      log.fall_reason = violations >= settings.fall.kinematic_violation_cycles ? "swing target outside kinematic region"
                                                                               : "DCM left the fall radius";
      break;
    }

    state = step_sim(state, vrp, settings.pushes, dt, params);
  }

  log.footprints = compare_footprints(nominal_footsteps, steps, settings.adapted_threshold);
  if (log.adapter_cycles > 0)
    log.mean_cycle_ms = 1e3 * cycle_seconds / static_cast<double>(log.adapter_cycles);
  return log;
}

} // namespace dcm
