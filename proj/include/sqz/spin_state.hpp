#ifndef SQZ_SPIN_STATE_HPP_
#define SQZ_SPIN_STATE_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

// Gaussian moment model of the collective pseudo-spin: mean Bloch vector,
// 3x3 fluctuation covariance, and the surviving coherent fraction. All
// operations are pure and value-semantic.

namespace sqz::spin {

template <typename Scalar>
struct CollectiveSpinState {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

  Scalar atom_count = 0;
  Scalar coherent_fraction = 1;  // 1 - eta
  Vector3 mean = Vector3::Zero();
  Matrix3 cov = Matrix3::Zero();
};

using SpinState = CollectiveSpinState<double>;

enum class Axis { x, y, z };

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotation_matrix(Axis axis, Scalar angle) {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  Vector3 unit = Vector3::Zero();
  unit(static_cast<int>(axis)) = Scalar(1);
  return Eigen::AngleAxis<Scalar>(angle, unit).toRotationMatrix();
}

// Coherent spin state of `atom_count` atoms polarized along `direction`
// (unit vector): mean of length atom_count/2, transverse variances
// atom_count/4, zero longitudinal variance.
template <typename Scalar>
CollectiveSpinState<Scalar> new_css(
    Scalar atom_count, const Eigen::Matrix<Scalar, 3, 1>& direction) {
  if (!(atom_count > Scalar(0)))
    throw std::invalid_argument("new_css: atom count must be positive");
  if (std::abs(direction.norm() - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("new_css: direction must be a unit vector");
  CollectiveSpinState<Scalar> state;
  state.atom_count = atom_count;
  state.coherent_fraction = Scalar(1);
  state.mean = (atom_count / Scalar(2)) * direction;
  state.cov = (atom_count / Scalar(4)) *
              (Eigen::Matrix<Scalar, 3, 3>::Identity() -
               direction * direction.transpose());
  return state;
}

template <typename Scalar>
CollectiveSpinState<Scalar> rotate(const CollectiveSpinState<Scalar>& state,
                                   Axis axis, Scalar angle) {
  const auto r = rotation_matrix(axis, angle);
  CollectiveSpinState<Scalar> out = state;
  out.mean = r * state.mean;
  out.cov = r * state.cov * r.transpose();
  return out;
}

// Clock sequence: pi/2 about y, precession phi about z, pi/2 about x.
// With right-handed rotation matrices the mean maps as
//   <J_z>_final = cos(phi) <J_y> - sin(phi) <J_z>,
// which fixes the signs below: R_x(+pi/2) R_z(-phi) R_y(+pi/2). At
// phi = -pi/2 the J_z marginal is exactly invariant.
template <typename Scalar>
CollectiveSpinState<Scalar> clock_sequence(
    const CollectiveSpinState<Scalar>& state, Scalar phi) {
  constexpr Scalar half_pi = Scalar(1.57079632679489661923);
  auto out = rotate(state, Axis::y, half_pi);
  out = rotate(out, Axis::z, -phi);
  return rotate(out, Axis::x, half_pi);
}

// Expected J_z after a Ramsey sequence with accumulated phase phi; the
// fringe amplitude carries the coherent fraction.
template <typename Scalar>
Scalar ramsey_fringe(const CollectiveSpinState<Scalar>& state, Scalar phi) {
  return state.coherent_fraction * std::cos(phi) * state.mean(1);
}

// xi = var(J_z) N_A / |<J>_eff|^2 with |<J>_eff| = coherent_fraction |<J>|.
// xi < 1 certifies entanglement; a fresh CSS gives exactly 1.
template <typename Scalar>
Scalar squeezing_parameter(const CollectiveSpinState<Scalar>& state) {
  const Scalar len = state.coherent_fraction * state.mean.norm();
  if (!(len > Scalar(0)))
    throw std::invalid_argument(
        "squeezing_parameter: mean spin vector must be nonzero");
  return state.cov(2, 2) * state.atom_count / (len * len);
}

// Multiplicative shortening of the Bloch vector by spontaneous scattering;
// the fluctuation covariance is untouched.
template <typename Scalar>
CollectiveSpinState<Scalar> shrink_coherence(
    const CollectiveSpinState<Scalar>& state, Scalar eta_increment) {
  if (eta_increment < Scalar(0) || eta_increment > Scalar(1))
    throw std::invalid_argument("shrink_coherence: eta must be in [0, 1]");
  CollectiveSpinState<Scalar> out = state;
  out.coherent_fraction = state.coherent_fraction * (Scalar(1) - eta_increment);
  return out;
}

}  // namespace sqz::spin

#endif  // SQZ_SPIN_STATE_HPP_
