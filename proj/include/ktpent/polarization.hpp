#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "ktpent/errors.hpp"

namespace ktpent {

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Matrix4c = Eigen::Matrix<std::complex<Scalar>, 4, 4>;
template <typename Scalar>
using Vector4c = Eigen::Matrix<std::complex<Scalar>, 4, 1>;

/// Two-photon basis ordering: index = 2 * slot1 + slot2 with H = 0, V = 1,
/// i.e. {HH, HV, VH, VV}. Slot 1 is the reflected arm (polarizer 1).
enum TwoPhotonBasis : int { kHH = 0, kHV = 1, kVH = 2, kVV = 3 };

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

/// |theta><theta| for a linear polariser at theta (H = 0 deg).
template <typename Scalar>
Matrix2c<Scalar> polarizer_projector(Scalar theta_deg) {
  const Scalar t = deg_to_rad(theta_deg);
  const Scalar c = std::cos(t);
  const Scalar s = std::sin(t);
  Matrix2c<Scalar> p;
  p << c * c, c * s, c * s, s * s;
  return p;
}

template <typename Scalar>
Matrix4c<Scalar> kron(const Matrix2c<Scalar>& a, const Matrix2c<Scalar>& b) {
  // Element-wise on purpose: fixed-size block assignment of complex<float>
  // mis-vectorises under -O3 with some GCC/Eigen combinations.
  Matrix4c<Scalar> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

/// Joint projector for polariser angles (theta1, theta2).
template <typename Scalar>
Matrix4c<Scalar> coincidence_projector(Scalar theta1_deg, Scalar theta2_deg) {
  return kron(polarizer_projector(theta1_deg), polarizer_projector(theta2_deg));
}

/// Density matrix on the two-photon polarization space. Construction checks
/// Hermiticity, unit trace and positive semidefiniteness.
template <typename Scalar>
class BasicTwoPhotonState {
 public:
  using Matrix = Matrix4c<Scalar>;

  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kPsdTol = 1e-10;

  explicit BasicTwoPhotonState(Matrix rho) : rho_(std::move(rho)) { check(); }

  static BasicTwoPhotonState from_pure(const Vector4c<Scalar>& psi) {
    return BasicTwoPhotonState(psi * psi.adjoint() / psi.squaredNorm());
  }

  const Matrix& rho() const { return rho_; }
  std::complex<Scalar> element(int row, int col) const { return rho_(row, col); }
  Scalar purity() const { return (rho_ * rho_).trace().real(); }

  Scalar min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  void check() const {
    if (!rho_.allFinite()) throw ValidationError("density matrix has non-finite entries");
    const Scalar herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > Scalar(kHermitianTol)) {
      std::ostringstream os;
      os << "density matrix not Hermitian (max deviation " << herm << ")";
      throw ValidationError(os.str());
    }
    const Scalar tr_err = std::abs(rho_.trace() - std::complex<Scalar>(1));
    if (tr_err > Scalar(kTraceTol)) {
      std::ostringstream os;
      os << "density matrix trace differs from 1 by " << tr_err;
      throw ValidationError(os.str());
    }
    const Scalar lmin = min_eigenvalue();
    if (lmin < -Scalar(kPsdTol)) {
      std::ostringstream os;
      os << "density matrix not positive semidefinite (min eigenvalue " << lmin << ")";
      throw ValidationError(os.str());
    }
  }

  Matrix rho_;
};

using TwoPhotonState = BasicTwoPhotonState<double>;

/// Tr[rho (P(theta1) x P(theta2))].
template <typename Scalar>
Scalar coincidence_probability(const BasicTwoPhotonState<Scalar>& state, Scalar theta1_deg,
                               Scalar theta2_deg) {
  return (state.rho() * coincidence_projector(theta1_deg, theta2_deg)).trace().real();
}

/// Probability that each photon alone passes its polariser.
template <typename Scalar>
std::pair<Scalar, Scalar> marginal_probabilities(const BasicTwoPhotonState<Scalar>& state,
                                                 Scalar theta1_deg, Scalar theta2_deg) {
  const Matrix2c<Scalar> id = Matrix2c<Scalar>::Identity();
  const Scalar p1 = (state.rho() * kron(polarizer_projector(theta1_deg), id)).trace().real();
  const Scalar p2 = (state.rho() * kron(id, polarizer_projector(theta2_deg))).trace().real();
  return {p1, p2};
}

}  // namespace ktpent
