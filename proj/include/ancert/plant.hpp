// Uncertain plant with a sector-bounded static nonlinearity, the rho-hard
// IQC virtual filter, and the plant+filter augmentation used by the theorems.
#pragma once

#include <functional>

#include "ancert/common.hpp"

namespace ancert {

// x+ = A x + B u + F omega
// nu = C x + D u + G omega,   omega = Theta(nu)
struct Plant {
  Mat A, B, F, C, D, G;
  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int w() const { return static_cast<int>(F.cols()); }
  int v() const { return static_cast<int>(C.rows()); }
  void validate() const;
};

// Virtual filter Phi for the uncertainty IQC:
//   xi+ = A xi + B nu + F omega
//   r   = C xi + D nu + G omega
// with multiplier M (kappa x kappa) and hardness factor rho_iqc.
struct IqcFilter {
  Mat A, B, F, C, D, G;
  Mat M;
  double rho_iqc = 1.0;
  int psi() const { return static_cast<int>(A.rows()); }
  int kappa() const { return static_cast<int>(C.rows()); }
  void validate(const Plant& plant) const;
};

// Series interconnection eta = Col(x, xi), ubar = Col(u, omega):
//   eta+ = A eta + B ubar,   r = C eta + D ubar
struct AugmentedSystem {
  Mat A, B, C, D;
  int n = 0, psi = 0, m = 0, w = 0, kappa = 0;
  int z() const { return n + psi; }
};
AugmentedSystem build_augmented(const Plant& plant, const IqcFilter& filter);

// Running partial sums S_I = sum_{k<=I} rho^{-2k} r(k)^T M r(k) of the IQC
// along a recorded (nu, omega) sequence, xi(0) = 0. The rho-hard property
// asserts S_I >= 0 for every I.
std::vector<double> iqc_partial_sums(const IqcFilter& filter,
                                     const std::vector<Vec>& nu,
                                     const std::vector<Vec>& omega);

struct PendulumParams {
  double Ts = 0.01;
  double gravity = 9.8;
  double length = 0.5;
  double friction = 0.05;
  double mass = 0.15;
  double phi_bar = 0.73;  // sector validity radius for nu = x1
};

// Discretized inverted pendulum with Theta(nu) = nu - sin(nu) and the
// section-5 off-by-one IQC filter. theta is the true uncertainty map.
struct Pendulum {
  Plant plant;
  IqcFilter filter;
  double l_s = 0.0, m_s = 0.0, phi_bar = 0.0;
  std::function<double(double)> theta;
  // Radius inside which the partial-sum property of the default multiplier
  // is path-independent: min(phi_bar, acos(1 - l_s)).
  double iqc_hard_radius = 0.0;
};
Pendulum build_pendulum(const PendulumParams& params = {});

}  // namespace ancert
