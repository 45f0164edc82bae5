#ifndef DCM_ZMP_EXP_INTERP_HPP
#define DCM_ZMP_EXP_INTERP_HPP

#include <cmath>
#include <stdexcept>

#include "dcm/model.hpp"

namespace dcm {

/**
 * Exponentially interpolated ZMP over a single support phase:
 *
 *   r(t) = A e^{-t/b} + B,   r(0) = r1,   r(T) = r2,   sigma = e^{T/b}.
 *
 * With this interpolant the DCM reachable at the end of the phase is affine
 * in sigma, which is what keeps the step adapter a QP.
 */
template <typename Scalar>
struct ExpZmpSegmentT
{
  Planar<Scalar> r1;
  Planar<Scalar> r2;
  Scalar T;
  Scalar b;
  Planar<Scalar> A;
  Planar<Scalar> B;
  Scalar sigma;

  Planar<Scalar> delta() const { return r2 - r1; }
};

using ExpZmpSegment = ExpZmpSegmentT<double>;

/// Closed-form DCM under an exponential ZMP: xi(t) = (A/2) e^{-t/b} + B + C e^{t/b}.
template <typename Scalar>
struct DcmClosedFormT
{
  Planar<Scalar> A;
  Planar<Scalar> B;
  Planar<Scalar> C;
  Scalar b;

  Planar<Scalar> position(Scalar t) const
  {
    return (A / Scalar(2)) * std::exp(-t / b) + B + C * std::exp(t / b);
  }

  Planar<Scalar> velocity(Scalar t) const
  {
    return -(A / (Scalar(2) * b)) * std::exp(-t / b) + (C / b) * std::exp(t / b);
  }
};

using DcmClosedForm = DcmClosedFormT<double>;

template <typename Scalar>
ExpZmpSegmentT<Scalar> make_segment(const Planar<Scalar>& r1,
                                    const Planar<Scalar>& r2,
                                    Scalar T,
                                    const LipParamsT<Scalar>& params)
{
  if (!(T > 0))
    throw std::invalid_argument("make_segment: duration must be positive");
  const Scalar b = params.time_constant();
  const Scalar sigma = std::exp(T / b);
  const Scalar den = Scalar(1) - sigma;
  ExpZmpSegmentT<Scalar> seg{r1, r2, T, b, Planar<Scalar>::Zero(), Planar<Scalar>::Zero(), sigma};
  seg.A = (r2 - r1) * sigma / den;
  seg.B = (r1 - r2 * sigma) / den;
  return seg;
}

template <typename Scalar>
Planar<Scalar> eval_zmp(const ExpZmpSegmentT<Scalar>& seg, Scalar t)
{
  if (t < 0 || t > seg.T)
    throw std::out_of_range("eval_zmp: t outside [0, T]");
  // endpoints are returned verbatim; the formula is only exact up to rounding there
  if (t == Scalar(0))
    return seg.r1;
  if (t == seg.T)
    return seg.r2;
  return seg.A * std::exp(-t / seg.b) + seg.B;
}

/// Initial value problem: C0 = xi0 - A/2 - B.
template <typename Scalar>
DcmClosedFormT<Scalar> solve_dcm_ivp(const ExpZmpSegmentT<Scalar>& seg, const Planar<Scalar>& xi0)
{
  return {seg.A, seg.B, xi0 - seg.A / Scalar(2) - seg.B, seg.b};
}

/// xi_T = sigma xi0 + (delta/2)(1 + sigma) + r1 - sigma r2
template <typename Scalar>
Planar<Scalar> final_dcm(const ExpZmpSegmentT<Scalar>& seg, const Planar<Scalar>& xi0)
{
  const Planar<Scalar> delta = seg.delta();
  return seg.sigma * xi0 + (delta / Scalar(2)) * (Scalar(1) + seg.sigma) + seg.r1 - seg.sigma * seg.r2;
}

/**
 * Residual of the initial/final coupling written in the adapter variables.
 *
 * The coupling itself is gamma_T + r_T + (r2 - xi0 - delta/2) sigma - r1 - delta/2.
 * Callers also carry xiT, which must equal gamma_T + r_T; the residual is the
 * coupling evaluated with xiT plus the defect of that offset definition, so it
 * reduces to the expression above whenever xiT = gamma_T + r_T and it reacts to
 * a perturbation of any single argument.
 */
template <typename Scalar>
Planar<Scalar> coupling_residual(const Planar<Scalar>& xi0,
                                 const Planar<Scalar>& xiT,
                                 const Planar<Scalar>& r1,
                                 const Planar<Scalar>& r2,
                                 const Planar<Scalar>& rT_zmp,
                                 const Planar<Scalar>& gammaT,
                                 Scalar sigma)
{
  const Planar<Scalar> delta = r2 - r1;
  const Planar<Scalar> coupling = xiT + (r2 - xi0 - delta / Scalar(2)) * sigma - r1 - delta / Scalar(2);
  const Planar<Scalar> offset_defect = xiT - gammaT - rT_zmp;
  return coupling + offset_defect;
}

/// Absolute tolerance below which a coupling residual counts as consistent.
inline constexpr double kCouplingTolerance = 1e-9;

} // namespace dcm

#endif // DCM_ZMP_EXP_INTERP_HPP
