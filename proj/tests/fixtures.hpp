#ifndef DCM_TESTS_FIXTURES_HPP
#define DCM_TESTS_FIXTURES_HPP

#include <random>
#include <vector>

#include "dcm/dcm_controller.hpp"
#include "dcm/dcm_planner.hpp"
#include "dcm/lip_sim.hpp"
#include "dcm/footstep_planner.hpp"
#include "oracles.hpp"

namespace fixture {

/// Initial stance pair plus n-2 alternating steps with random placement and timing.
inline std::vector<dcm::Footstep> random_footsteps(std::mt19937_64& rng, int n, double T_lo = 0.3, double T_hi = 1.0)
{
  using namespace dcm;
  std::vector<Footstep> f(2);
  f[0] = {0, Side::Left, {0.0, 0.08}, 0.0, 0.0, 0.0};
  f[1] = {1, Side::Right, {0.0, -0.08}, 0.0, 0.0, 0.0};
  double t = 0.0, x = 0.0, yaw = 0.0;
  for (int k = 2; k < n; ++k) {
    const Side side = k % 2 ? Side::Right : Side::Left;
    const double T = oracle::uniform(rng, T_lo, T_hi);
    t += T;
    x += oracle::uniform(rng, -0.1, 0.25);
    yaw += oracle::uniform(rng, -0.2, 0.2);
    const PlanarVec axle(x, oracle::uniform(rng, -0.05, 0.05));
    f.push_back({k, side, axle + side_sign(side) * oracle::uniform(rng, 0.05, 0.12) * lateral_unit(yaw), yaw, t, T});
  }
  return f;
}

/// Evaluate a plan piece exactly at absolute time t (no clamping, no lookup).
inline std::pair<dcm::PlanarVec, dcm::PlanarVec> eval_piece(const dcm::DcmPlan::Piece& piece, double t,
                                                            const dcm::LipParams& params)
{
  using namespace dcm;
  const double s = t - piece.origin;
  if (const auto* ss = std::get_if<SsSegment>(&piece.segment))
    return eval_ss(*ss, std::clamp(s, 0.0, ss->duration), params);
  const auto& ds = std::get<DsSegment>(piece.segment);
  return {ds.position(s), ds.velocity(s)};
}

struct JunctionJumps
{
  double position = 0.0;
  double velocity = 0.0;
  double zmp = 0.0;
};

/// Largest jumps across every finite junction of the plan.
inline JunctionJumps junction_jumps(const dcm::DcmPlan& plan, const dcm::LipParams& params)
{
  JunctionJumps j;
  const auto pieces = plan.pieces();
  const double b = params.time_constant();
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const double t = pieces[i].end;
    const auto [p0, v0] = eval_piece(pieces[i], t, params);
    const auto [p1, v1] = eval_piece(pieces[i + 1], t, params);
    j.position = std::max(j.position, (p1 - p0).norm());
    j.velocity = std::max(j.velocity, (v1 - v0).norm());
    j.zmp = std::max(j.zmp, ((p1 - b * v1) - (p0 - b * v0)).norm());
  }
  return j;
}

/**
 * Closed-loop DCM error decay rate under gain k: the plant integrated by
 * step_sim at period dt toward a constant reference, and the rate fitted by
 * least squares on log |error| over `horizon` seconds.
 */
inline double measured_decay_rate(double k, double dt, const dcm::LipParams& params, double horizon = 0.5)
{
  using namespace dcm;
  const ControllerGains gains(k);
  const PlanarVec ref(0.1, -0.05);
  SimState s;
  s.dcm.xi = ref + PlanarVec(0.03, 0.02);
  s.dcm.com = ref;
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  while (s.time <= horizon + 1e-12) {
    const double y = std::log((s.dcm.xi - ref).norm());
    st += s.time;
    sy += y;
    stt += s.time * s.time;
    sty += s.time * y;
    ++n;
    const PlanarVec vrp = vrp_command_sampled<double>(s.dcm.xi, ref, ref, dt, gains, params);
    s = step_sim(s, vrp, {}, dt, params);
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return -slope;
}

} // namespace fixture

#endif
