#include "dcm/dcm_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcm {

namespace {

DsSegment hermite_blend(const PlanarVec& p0, const PlanarVec& v0, const PlanarVec& p1, const PlanarVec& v1, double d)
{
  DsSegment ds;
  ds.duration = d;
  ds.poly_coeffs[0] = p0;
  ds.poly_coeffs[1] = v0;
  ds.poly_coeffs[2] = (3.0 * (p1 - p0) - (2.0 * v0 + v1) * d) / (d * d);
  ds.poly_coeffs[3] = (2.0 * (p0 - p1) + (v0 + v1) * d) / (d * d * d);
  return ds;
}

} // namespace

PlanarVec DsSegment::position(double s) const
{
  const auto& c = poly_coeffs;
  return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
}

PlanarVec DsSegment::velocity(double s) const
{
  const auto& c = poly_coeffs;
  return c[1] + s * (2.0 * c[2] + s * 3.0 * c[3]);
}

std::vector<BoundaryPair> backward_recursion(std::span<const PlanarVec> zmp_points,
                                             std::span<const double> durations,
                                             const LipParams& params,
                                             std::optional<PinnedEos> pin)
{
  if (zmp_points.size() < 2)
    throw std::invalid_argument("backward_recursion: need at least two zmp points");
  if (durations.size() != zmp_points.size() - 1)
    throw std::invalid_argument("backward_recursion: need one duration per single support segment");
  for (double T : durations)
    if (!(T > 0))
      throw std::invalid_argument("backward_recursion: durations must be positive");
  if (pin && pin->segment >= durations.size())
    throw std::out_of_range("backward_recursion: pinned segment out of range");

  const double b = params.time_constant();
  const std::size_t n = durations.size();
  std::vector<BoundaryPair> out(n);
  PlanarVec eos = zmp_points.back();
  for (std::size_t i = n; i-- > 0;) {
    if (pin && pin->segment == i)
      eos = pin->xi_eos;
    const PlanarVec& r = zmp_points[i];
    out[i].xi_eos = eos;
    out[i].xi_ios = r + std::exp(-durations[i] / b) * (eos - r);
    eos = out[i].xi_ios;
  }
  return out;
}

std::pair<PlanarVec, PlanarVec> eval_ss(const SsSegment& segment, double t, const LipParams& params)
{
  if (t < 0.0 || t > segment.duration)
    throw std::out_of_range("eval_ss: t outside [0, duration]");
  const double b = params.time_constant();
  if (t == segment.duration) {
    const PlanarVec xi = segment.xi_eos;
    return {xi, (xi - segment.zmp) / b};
  }
  const PlanarVec xi = segment.zmp + std::exp(t / b) * (segment.xi_ios - segment.zmp);
  return {xi, (xi - segment.zmp) / b};
}

DsSegment smooth_ds(const SsSegment& prev, const SsSegment& next, double ds_duration, const LipParams& params)
{
  if (!(ds_duration > 0))
    throw std::invalid_argument("smooth_ds: duration must be positive");
  if (ds_duration > prev.duration || ds_duration > next.duration)
    throw std::invalid_argument("smooth_ds: double support longer than an adjacent single support segment");

  const double d = ds_duration;
  const auto [p0, v0] = eval_ss(prev, prev.duration - 0.5 * d, params);
  const auto [p1, v1] = eval_ss(next, 0.5 * d, params);

  return hermite_blend(p0, v0, p1, v1, d);
}

DcmPlan::DcmPlan(std::vector<Piece> pieces,
                 std::vector<SsSegment> stance_segments,
                 std::vector<PlanarVec> recursion_eos,
                 PlanarVec final_zmp,
                 double total_duration,
                 double time_constant)
  : pieces_(std::move(pieces)),
    stance_segments_(std::move(stance_segments)),
    recursion_eos_(std::move(recursion_eos)),
    final_zmp_(std::move(final_zmp)),
    total_duration_(total_duration),
    b_(time_constant)
{
  if (pieces_.empty())
    throw std::invalid_argument("DcmPlan: no pieces");
}

PlanSample DcmPlan::sample(double t) const
{
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const Piece& p) { return value < p.begin; });
  const Piece& piece = it == pieces_.begin() ? pieces_.front() : *std::prev(it);
  const double local = std::max(0.0, t - piece.origin);

  PlanSample s;
  if (const auto* ss = std::get_if<SsSegment>(&piece.segment)) {
    const double tl = std::min(local, ss->duration);
    s.xi = ss->zmp + std::exp(tl / b_) * (ss->xi_ios - ss->zmp);
    s.xi_dot = (s.xi - ss->zmp) / b_;
    s.zmp = ss->zmp;
  } else {
    const auto& ds = std::get<DsSegment>(piece.segment);
    const double tl = std::min(local, ds.duration);
    s.xi = ds.position(tl);
    s.xi_dot = ds.velocity(tl);
    s.zmp = s.xi - b_ * s.xi_dot;
  }
  return s;
}

DcmPlan build_plan(std::span<const Footstep> footsteps,
                   double ds_duration,
                   const LipParams& params,
                   std::optional<PinnedEos> pin,
                   std::optional<double> plan_start)
{
  const std::size_t M = footsteps.size();
  if (M < 2)
    throw std::invalid_argument("build_plan: need at least the initial stance pair");
  if (!(ds_duration > 0))
    throw std::invalid_argument("build_plan: ds_duration must be positive");
  for (std::size_t k = 2; k < M; ++k)
    if (!(footsteps[k].impact_time > footsteps[k - 1].impact_time))
      throw std::invalid_argument("build_plan: impact times must increase after the initial stance");

  const double d = ds_duration;
  const double b = params.time_constant();
  const PlanarVec initial_zmp = 0.5 * (footsteps[0].position + footsteps[1].position);
  const PlanarVec final_zmp = 0.5 * (footsteps[M - 2].position + footsteps[M - 1].position);

  // stance segments indexed by footstep: 0 = initial rest, 1..M-2 walking, M-1 = final rest
  std::vector<SsSegment> stance(M);
  std::vector<PlanarVec> recursion_eos(M, final_zmp);
  stance[0] = SsSegment{initial_zmp, initial_zmp, initial_zmp, d};
  stance[M - 1] = SsSegment{final_zmp, final_zmp, final_zmp, d};
  recursion_eos[0] = initial_zmp;

  if (M > 2) {
    std::vector<PlanarVec> zmp;
    std::vector<double> durations;
    for (std::size_t k = 1; k + 1 < M; ++k) {
      zmp.push_back(footsteps[k].position);
      durations.push_back(footsteps[k + 1].impact_time - footsteps[k].impact_time);
    }
    zmp.push_back(final_zmp);

    std::optional<PinnedEos> local_pin;
    if (pin) {
      if (pin->segment < 1 || pin->segment + 1 >= M)
        throw std::out_of_range("build_plan: pinned stance index out of range");
      local_pin = PinnedEos{pin->segment - 1, pin->xi_eos};
    }
    const auto free = backward_recursion(zmp, durations, params);
    const auto bounds = local_pin ? backward_recursion(zmp, durations, params, local_pin) : free;
    for (std::size_t k = 1; k + 1 < M; ++k) {
      stance[k] = SsSegment{zmp[k - 1], bounds[k - 1].xi_ios, bounds[k - 1].xi_eos, durations[k - 1]};
      recursion_eos[k] = free[k - 1].xi_eos;
    }
  }

  std::vector<DcmPlan::Piece> pieces;
  const double t_first = footsteps[1].impact_time;
  if (plan_start && *plan_start < t_first) {
    // weight shift: leave the rest state at plan_start, land on the first stance segment as usual
    const auto [p1, v1] = eval_ss(stance[1], 0.5 * d, params);
    pieces.push_back({*plan_start, t_first + d, *plan_start,
                      hermite_blend(initial_zmp, PlanarVec::Zero(), p1, v1, t_first + d - *plan_start)});
  }
  for (std::size_t k = 1; k < M; ++k) {
    const double t_k = footsteps[k].impact_time;
    if (k > 1 || pieces.empty())
      pieces.push_back({t_k, t_k + d, t_k, smooth_ds(stance[k - 1], stance[k], d, params)});
    if (k + 1 < M)
      pieces.push_back({t_k + d, footsteps[k + 1].impact_time, t_k + 0.5 * d, stance[k]});
  }
  const double t_last = footsteps[M - 1].impact_time;
  pieces.push_back({t_last + d, std::numeric_limits<double>::infinity(), t_last + 0.5 * d, stance[M - 1]});

  return DcmPlan(std::move(pieces), std::move(stance), std::move(recursion_eos), final_zmp, t_last + d, b);
}

} // namespace dcm
