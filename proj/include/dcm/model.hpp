#ifndef DCM_MODEL_HPP
#define DCM_MODEL_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace dcm {

/// Planar quantity on the walking surface (position, velocity or force).
template <typename Scalar>
using Planar = Eigen::Matrix<Scalar, 2, 1>;

using PlanarVec = Planar<double>;

template <typename Scalar>
bool all_finite(const Planar<Scalar>& v)
{
  return std::isfinite(v.x()) && std::isfinite(v.y());
}

/**
 * Linear inverted pendulum parameters.
 *
 * The pendulum time constant b = sqrt(z0 / g) is always recomputed from the
 * CoM height and gravity so the two can never drift apart.
 */
template <typename Scalar>
class LipParamsT
{
public:
  LipParamsT() : LipParamsT(Scalar(33.0), Scalar(0.53), Scalar(9.81)) {}

  LipParamsT(Scalar mass, Scalar com_height, Scalar gravity)
    : mass_(mass), com_height_(com_height), gravity_(gravity)
  {
    if (!(mass > 0) || !(com_height > 0) || !(gravity > 0))
      throw std::invalid_argument("LipParams: mass, com_height and gravity must be positive");
  }

  Scalar mass() const { return mass_; }
  Scalar com_height() const { return com_height_; }
  Scalar gravity() const { return gravity_; }
  Scalar time_constant() const { return std::sqrt(com_height_ / gravity_); }

  /// Params with a prescribed time constant, keeping g and choosing z0 = b^2 g.
  static LipParamsT with_time_constant(Scalar b, Scalar mass = Scalar(33.0), Scalar gravity = Scalar(9.81))
  {
    return LipParamsT(mass, b * b * gravity, gravity);
  }

private:
  Scalar mass_;
  Scalar com_height_;
  Scalar gravity_;
};

using LipParams = LipParamsT<double>;

/// DCM and CoM position. CoM velocity is (xi - com) / b and is never stored.
template <typename Scalar>
struct DcmStateT
{
  Planar<Scalar> xi = Planar<Scalar>::Zero();
  Planar<Scalar> com = Planar<Scalar>::Zero();
};

using DcmState = DcmStateT<double>;

/// xi_dot = (xi - vrp) / b + (b / m) f_ext
template <typename Scalar>
Planar<Scalar> dcm_rate(const Planar<Scalar>& xi,
                        const Planar<Scalar>& vrp,
                        const LipParamsT<Scalar>& params,
                        const Planar<Scalar>& f_ext = Planar<Scalar>::Zero())
{
  const Scalar b = params.time_constant();
  return (xi - vrp) / b + (b / params.mass()) * f_ext;
}

/// x_dot = (xi - x) / b
template <typename Scalar>
Planar<Scalar> com_rate(const DcmStateT<Scalar>& state, const LipParamsT<Scalar>& params)
{
  return (state.xi - state.com) / params.time_constant();
}

} // namespace dcm

#endif // DCM_MODEL_HPP
