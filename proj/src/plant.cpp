#include "ancert/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace ancert {

void Plant::validate() const {
  const int nn = n(), mm = m(), ww = w(), vv = v();
  if (A.cols() != nn || B.rows() != nn || F.rows() != nn)
    throw std::invalid_argument("plant: state equation dimension mismatch");
  if (C.cols() != nn || D.rows() != vv || D.cols() != mm || G.rows() != vv ||
      G.cols() != ww)
    throw std::invalid_argument("plant: output equation dimension mismatch");
}

void IqcFilter::validate(const Plant& plant) const {
  const int p = psi(), k = kappa();
  if (A.cols() != p || B.rows() != p || B.cols() != plant.v() ||
      F.rows() != p || F.cols() != plant.w())
    throw std::invalid_argument("iqc filter: state equation mismatch");
  if (C.rows() != k || C.cols() != p || D.rows() != k ||
      D.cols() != plant.v() || G.rows() != k || G.cols() != plant.w())
    throw std::invalid_argument("iqc filter: output equation mismatch");
  if (M.rows() != k || M.cols() != k)
    throw std::invalid_argument("iqc filter: multiplier must be kappa x kappa");
  if (rho_iqc <= 0.0 || rho_iqc > 1.0)
    throw std::invalid_argument("iqc filter: rho must be in (0, 1]");
}

AugmentedSystem build_augmented(const Plant& plant, const IqcFilter& filter) {
  plant.validate();
  filter.validate(plant);
  AugmentedSystem s;
  s.n = plant.n();
  s.psi = filter.psi();
  s.m = plant.m();
  s.w = plant.w();
  s.kappa = filter.kappa();
  const int z = s.z();
  s.A = Mat::Zero(z, z);
  s.A.topLeftCorner(s.n, s.n) = plant.A;
  s.A.bottomLeftCorner(s.psi, s.n) = filter.B * plant.C;
  s.A.bottomRightCorner(s.psi, s.psi) = filter.A;
  s.B = Mat::Zero(z, s.m + s.w);
  s.B.topLeftCorner(s.n, s.m) = plant.B;
  s.B.topRightCorner(s.n, s.w) = plant.F;
  s.B.bottomLeftCorner(s.psi, s.m) = filter.B * plant.D;
  s.B.bottomRightCorner(s.psi, s.w) = filter.B * plant.G + filter.F;
  s.C = Mat::Zero(s.kappa, z);
  s.C.leftCols(s.n) = filter.D * plant.C;
  s.C.rightCols(s.psi) = filter.C;
  s.D = Mat::Zero(s.kappa, s.m + s.w);
  s.D.leftCols(s.m) = filter.D * plant.D;
  s.D.rightCols(s.w) = filter.D * plant.G + filter.G;
  return s;
}

std::vector<double> iqc_partial_sums(const IqcFilter& filter,
                                     const std::vector<Vec>& nu,
                                     const std::vector<Vec>& omega) {
  if (nu.size() != omega.size())
    throw std::invalid_argument("iqc_partial_sums: sequence length mismatch");
  std::vector<double> sums;
  sums.reserve(nu.size());
  Vec xi = Vec::Zero(filter.psi());
  double acc = 0.0;
  double weight = 1.0;
  const double decay = 1.0 / (filter.rho_iqc * filter.rho_iqc);
  for (size_t k = 0; k < nu.size(); ++k) {
    Vec r = filter.C * xi + filter.D * nu[k] + filter.G * omega[k];
    acc += weight * (r.transpose() * filter.M * r).value();
    sums.push_back(acc);
    xi = filter.A * xi + filter.B * nu[k] + filter.F * omega[k];
    weight *= decay;
  }
  return sums;
}

Pendulum build_pendulum(const PendulumParams& p) {
  Pendulum pen;
  const double Ts = p.Ts, g = p.gravity, l = p.length;
  const double ml2 = p.mass * l * l;
  pen.plant.A = Mat{{1.0, Ts}, {Ts * g / l, 1.0 - Ts * p.friction / ml2}};
  pen.plant.B = Mat{{0.0}, {Ts / ml2}};
  pen.plant.F = Mat{{0.0}, {-Ts * g / l}};
  pen.plant.C = Mat{{1.0, 0.0}};
  pen.plant.D = Mat::Zero(1, 1);
  pen.plant.G = Mat::Zero(1, 1);

  pen.phi_bar = p.phi_bar;
  pen.l_s = (p.phi_bar - std::sin(p.phi_bar)) / p.phi_bar;
  pen.m_s = 0.0;
  pen.iqc_hard_radius = std::min(p.phi_bar, std::acos(1.0 - pen.l_s));

  pen.filter.A = Mat::Zero(1, 1);
  pen.filter.B = Mat{{-pen.l_s}};
  pen.filter.F = Mat{{1.0}};
  pen.filter.C = Mat{{1.0}, {0.0}};
  pen.filter.D = Mat{{pen.l_s}, {-pen.m_s}};
  pen.filter.G = Mat{{-1.0}, {1.0}};
  pen.filter.M = Mat{{0.0, 1.0}, {1.0, 0.0}};
  pen.filter.rho_iqc = 1.0;

  pen.theta = [](double nu) { return nu - std::sin(nu); };
  return pen;
}

}  // namespace ancert
