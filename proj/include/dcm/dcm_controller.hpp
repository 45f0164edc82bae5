#ifndef DCM_DCM_CONTROLLER_HPP
#define DCM_DCM_CONTROLLER_HPP

#include <cmath>
#include <stdexcept>

#include "dcm/model.hpp"

namespace dcm {

/// Diagonal DCM feedback gain; every entry must exceed 1 for a stable loop.
template <typename Scalar>
struct ControllerGainsT
{
  Planar<Scalar> k_xi = Planar<Scalar>::Constant(Scalar(2));

  ControllerGainsT() = default;
  explicit ControllerGainsT(Scalar k) : k_xi(Planar<Scalar>::Constant(k)) { validate(); }
  explicit ControllerGainsT(const Planar<Scalar>& k) : k_xi(k) { validate(); }

  void validate() const
  {
    if (!(k_xi.x() > 1) || !(k_xi.y() > 1))
      throw std::invalid_argument("ControllerGains: every gain must be greater than 1");
  }

  Eigen::DiagonalMatrix<Scalar, 2> matrix() const { return k_xi.asDiagonal(); }
};

using ControllerGains = ControllerGainsT<double>;

/// r_vrp = xi_ref - b xi_dot_ref + K (xi - xi_ref)
template <typename Scalar>
Planar<Scalar> vrp_command(const Planar<Scalar>& xi,
                           const Planar<Scalar>& xi_ref,
                           const Planar<Scalar>& xi_dot_ref,
                           const ControllerGainsT<Scalar>& gains,
                           const LipParamsT<Scalar>& params)
{
  const Scalar b = params.time_constant();
  return xi_ref - b * xi_dot_ref + gains.k_xi.cwiseProduct(xi - xi_ref);
}

/**
 * Same law for a VRP held constant over a control period dt. The feedforward
 * is the constant VRP that carries xi_ref(t) exactly onto xi_ref(t + dt), so
 * a perfectly tracked reference stays perfectly tracked under zero-order hold.
 * It tends to xi_ref - b xi_dot_ref as dt -> 0.
 */
template <typename Scalar>
Planar<Scalar> vrp_command_sampled(const Planar<Scalar>& xi,
                                   const Planar<Scalar>& xi_ref,
                                   const Planar<Scalar>& xi_ref_next,
                                   Scalar dt,
                                   const ControllerGainsT<Scalar>& gains,
                                   const LipParamsT<Scalar>& params)
{
  if (!(dt > 0))
    throw std::invalid_argument("vrp_command_sampled: dt must be positive");
  const Scalar e = std::exp(dt / params.time_constant());
  const Planar<Scalar> feedforward = (xi_ref_next - e * xi_ref) / (Scalar(1) - e);
  return feedforward + gains.k_xi.cwiseProduct(xi - xi_ref);
}

/// Desired CoM acceleration (x - r_vrp) / b^2.
template <typename Scalar>
Planar<Scalar> com_acc_command(const Planar<Scalar>& com, const Planar<Scalar>& vrp_des, const LipParamsT<Scalar>& params)
{
  const Scalar b = params.time_constant();
  return (com - vrp_des) / (b * b);
}

/// Desired linear momentum rate m (x - r_vrp) / b^2.
template <typename Scalar>
Planar<Scalar> momentum_rate_command(const Planar<Scalar>& com, const Planar<Scalar>& vrp_des, const LipParamsT<Scalar>& params)
{
  return params.mass() * com_acc_command(com, vrp_des, params);
}

} // namespace dcm

#endif // DCM_DCM_CONTROLLER_HPP
