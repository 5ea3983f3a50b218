#include "ancert/simulator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ancert {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Event: return "event";
    case Scheme::Self: return "self";
    case Scheme::Periodic: return "periodic";
  }
  return "?";
}

int efficiency_basis_points(int samples, int transmissions) {
  const long long num =
      10000LL * (samples - transmissions) + samples / 2;
  return static_cast<int>(num / samples);
}

std::string metrics_json(const Metrics& m) {
  std::ostringstream out;
  out << "{\n"
      << "  \"samples\": " << m.samples << ",\n"
      << "  \"transmissions\": " << m.transmissions << ",\n"
      << "  \"efficiency\": " << m.efficiency << ",\n"
      << "  \"efficiency_percent\": " << m.efficiency_bp / 100 << "."
      << (m.efficiency_bp % 100 < 10 ? "0" : "") << m.efficiency_bp % 100
      << ",\n"
      << "  \"converged\": " << (m.converged ? "true" : "false") << ",\n"
      << "  \"max_gap\": " << m.max_gap << "\n"
      << "}\n";
  return out.str();
}

RolloutResult rollout(const SimConfig& cfg, const Plant& plant,
                      const IqcFilter& filter, const Dnn& net,
                      const UncertaintyMap& theta) {
  plant.validate();
  filter.validate(plant);
  net.validate();
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.x0.size() != plant.n())
    throw std::invalid_argument("x0 dimension mismatch");
  if (!cfg.x0.allFinite()) throw std::invalid_argument("x0 must be finite");
  if (cfg.scheme == Scheme::Event && cfg.horizon % cfg.et.theta != 0)
    throw std::invalid_argument("event scheme: horizon must be a multiple of theta");
  if (cfg.scheme == Scheme::Periodic && cfg.period < 1)
    throw std::invalid_argument("period must be >= 1");

  const Vec x_star =
      cfg.x_star.size() == plant.n() ? cfg.x_star : Vec::Zero(plant.n());

  Trajectory traj;
  traj.n = plant.n();
  traj.psi = filter.psi();
  traj.m = plant.m();
  traj.w = plant.w();
  traj.kappa = filter.kappa();

  Vec x = cfg.x0;
  Vec xi = Vec::Zero(filter.psi());  // xi(0) = 0
  Vec x_kq = x;
  Vec u = forward(net, x_kq);  // k_0 = 0 transmission
  double alpha = 0.0;
  int next_tx = 0;  // ST: next scheduled transmission instant

  for (int k = 0; k < cfg.horizon; ++k) {
    if (x.norm() > cfg.blowup_guard) throw DivergenceError(k);

    bool tx = false;
    if (k == 0) {
      tx = true;  // k_0 = 0
      if (cfg.scheme == Scheme::Event) {
        const EtStep s = et_step(cfg.et, alpha, x, x_kq, x_star);
        alpha = s.alpha_next;
      }
    } else {
      switch (cfg.scheme) {
        case Scheme::Event:
          if (k % cfg.et.theta == 0) {
            const EtStep s = et_step(cfg.et, alpha, x, x_kq, x_star);
            alpha = s.alpha_next;
            tx = s.fire;
          }
          break;
        case Scheme::Self:
          tx = (k == next_tx);
          break;
        case Scheme::Periodic:
          tx = (k % cfg.period == 0);
          break;
      }
    }

    if (tx) {
      x_kq = x;
      u = forward(net, x_kq);
      traj.tx_instants.push_back(k);
      if (cfg.scheme == Scheme::Self) {
        // True-closed-loop predictor: advance plant + Theta with the held
        // input from the current full state.
        const Vec xs = x;
        const Vec us = u;
        Predictor predict = [&plant, &theta, xs, us](int s) {
          Vec xp = xs;
          for (int i = 0; i < s; ++i) {
            const Vec nup = plant.C * xp + plant.D * us;
            const Vec wp = theta(nup);
            xp = plant.A * xp + plant.B * us + plant.F * wp;
          }
          return xp;
        };
        next_tx = k + st_next(cfg.st, x_kq, x_star, predict);
      }
    }

    const Vec nu = plant.C * x + plant.D * u;  // plant G assumed inactive
    const Vec omega = theta(nu);
    const Vec r = filter.C * xi + filter.D * nu + filter.G * omega;

    traj.x.push_back(x);
    traj.xi.push_back(xi);
    traj.u.push_back(u);
    traj.omega.push_back(omega);
    traj.nu.push_back(nu);
    traj.r.push_back(r);
    traj.alpha.push_back(alpha);
    traj.tx.push_back(tx ? 1 : 0);

    const Vec x_next = plant.A * x + plant.B * u + plant.F * omega;
    xi = filter.A * xi + filter.B * nu + filter.F * omega;
    x = x_next;
  }
  if (x.norm() > cfg.blowup_guard) throw DivergenceError(cfg.horizon);
  traj.x.push_back(x);

  Metrics m;
  m.samples = cfg.horizon;
  m.transmissions = static_cast<int>(traj.tx_instants.size());
  m.efficiency = 1.0 - static_cast<double>(m.transmissions) / m.samples;
  m.efficiency_bp = efficiency_basis_points(m.samples, m.transmissions);
  m.converged = (x - x_star).norm() < cfg.conv_tol;
  for (size_t q = 1; q < traj.tx_instants.size(); ++q)
    m.max_gap = std::max(m.max_gap,
                         traj.tx_instants[q] - traj.tx_instants[q - 1]);
  if (!traj.tx_instants.empty())
    m.max_gap = std::max(m.max_gap, cfg.horizon - traj.tx_instants.back());
  return {std::move(traj), m};
}

std::vector<double> lyapunov_column(const Trajectory& traj, const Mat& P,
                                    const Vec& x_star) {
  std::vector<double> V;
  const size_t steps = traj.xi.size();
  V.reserve(steps);
  for (size_t k = 0; k < steps; ++k) {
    Vec eta(traj.n + traj.psi);
    eta << traj.x[k] - x_star, traj.xi[k];
    V.push_back(eta.dot(P * eta));
  }
  return V;
}

namespace {

double h_at(const Trajectory& traj, const Mat& R, const Mat& T1, const Mat& T2,
            int lo, int hi, int k, const Vec& x_star) {
  const int n = traj.n;
  auto xs = [&](int s) -> Vec { return traj.x[s] - x_star; };
  auto y = [&](int s) -> Vec { return xs(s + 1) - xs(s); };

  Vec m0(2 * n);
  m0 << xs(lo), xs(hi);
  Vec sum1 = Vec::Zero(n), sum2 = Vec::Zero(n);
  for (int s = lo; s <= k; ++s) sum1 += xs(s);
  for (int s = k; s <= hi; ++s) sum2 += xs(s);

  Vec chi1(4 * n), chi2(4 * n);
  chi1 << (k - lo) * m0, xs(k) - xs(lo), sum1 - xs(lo);
  chi2 << (hi - k) * m0, xs(hi) - xs(k), sum2 - xs(hi);
  const double H1 = 2.0 * chi1.dot(R * chi2);

  double acc1 = 0.0;
  for (int s = lo; s <= k; ++s) acc1 += y(s).dot(T1 * y(s));
  const double H2 = (hi - k) * (acc1 - y(k).dot(T1 * y(k)));

  double acc2 = 0.0;
  for (int s = k; s <= hi; ++s) acc2 += y(s).dot(T2 * y(s));
  const double H3 = (k - lo) * (y(hi).dot(T2 * y(hi)) - acc2);
  return H1 + H2 + H3;
}

}  // namespace

std::vector<double> looped_function_column(const Trajectory& traj, const Mat& R,
                                           const Mat& T1, const Mat& T2,
                                           const std::vector<int>& boundaries,
                                           const Vec& x_star) {
  std::vector<double> H(traj.xi.size(), 0.0);
  const int last_usable = static_cast<int>(traj.x.size()) - 2;  // need y(hi)
  for (size_t b = 0; b + 1 < boundaries.size(); ++b) {
    const int lo = boundaries[b], hi = boundaries[b + 1];
    if (hi > last_usable) break;
    H[lo] = h_at(traj, R, T1, T2, lo, hi, lo, x_star);
    if (static_cast<size_t>(hi) < H.size())
      H[hi] = h_at(traj, R, T1, T2, lo, hi, hi, x_star);
  }
  return H;
}

LyapunovReport lyapunov_monitor(const Trajectory& traj, const Assignment& cert,
                                Scheme scheme, int theta, const Vec& x_star) {
  LyapunovReport rep;
  const Mat& P = cert.at("P");
  const std::vector<double> V = lyapunov_column(traj, P, x_star);
  const double weight = scheme == Scheme::Event ? theta - 1 : 0;

  const auto& txs = traj.tx_instants;
  for (size_t q = 0; q + 1 < txs.size(); ++q) {
    const int k0 = txs[q], k1 = txs[q + 1];
    const double w0 = V[k0] + weight * traj.alpha[k0];
    const double w1 = V[k1] + weight * traj.alpha[k1];
    Vec eta(traj.n + traj.psi);
    eta << traj.x[k0] - x_star, traj.xi[k0];
    if (eta.norm() < 1e-9) {
      if (w1 >= w0) rep.nonstrict_at_equilibrium = true;
      continue;
    }
    if (w1 >= w0) {
      rep.pass = false;
      rep.violations.push_back(k1);
    }
  }

  if (cert.count("R") && cert.count("T1") && cert.count("T2")) {
    std::vector<int> boundaries;
    if (scheme == Scheme::Event) {
      for (int k = 0; k < static_cast<int>(traj.xi.size()); k += theta)
        boundaries.push_back(k);
    } else {
      boundaries = txs;
    }
    const std::vector<double> H = looped_function_column(
        traj, cert.at("R"), cert.at("T1"), cert.at("T2"), boundaries, x_star);
    for (int b : boundaries)
      if (b < static_cast<int>(H.size()))
        rep.max_boundary_h = std::max(rep.max_boundary_h, std::abs(H[b]));
    rep.h_identity_ok = rep.max_boundary_h <= 1e-9;
    if (!rep.h_identity_ok) rep.pass = false;
  }
  return rep;
}

IqcReport iqc_monitor(const Trajectory& traj, const IqcFilter& filter,
                      double sector_radius) {
  IqcReport rep;
  const std::vector<double> S =
      iqc_partial_sums(filter, traj.nu, traj.omega);
  rep.min_partial = 0.0;
  for (size_t k = 0; k < S.size(); ++k) {
    if (rep.min_index < 0 || S[k] < rep.min_partial) {
      rep.min_partial = S[k];
      rep.min_index = static_cast<int>(k);
    }
    if (rep.sector_exit < 0 &&
        traj.nu[k].cwiseAbs().maxCoeff() > sector_radius)
      rep.sector_exit = static_cast<int>(k);
  }
  rep.pass = rep.min_partial >= -1e-9;
  return rep;
}

RoaReport roa_validation(const RoaEllipsoid& roa, const SimConfig& base,
                         const Plant& plant, const IqcFilter& filter,
                         const Dnn& net, const UncertaintyMap& theta,
                         int n_points, int horizon) {
  if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(roa.P1));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("roa_validation: P1 must be positive definite");
  const Mat half_inv = es.eigenvectors() *
                       es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  const int n = static_cast<int>(roa.P1.rows());

  RoaReport rep;
  rep.total = n_points;
  const double golden = 0.6180339887498949;
  for (int i = 0; i < n_points; ++i) {
    // Low-discrepancy angles; alternate boundary and interior radii.
    const double frac =
        std::fmod(i * golden + 0.5 * (base.seed % 97) / 97.0, 1.0);
    const double t = 2.0 * M_PI * frac;
    const double radius = (i % 2 == 0) ? 1.0 : std::sqrt((i % 7 + 1) / 8.0);
    Vec dir = Vec::Zero(n);
    if (n == 2) {
      dir << std::cos(t), std::sin(t);
    } else {
      for (int j = 0; j < n; ++j)
        dir(j) = std::cos(t + 2.0 * M_PI * j / n);
      dir.normalize();
    }
    SimConfig cfg = base;
    cfg.horizon = horizon;
    if (cfg.scheme == Scheme::Event && horizon % cfg.et.theta != 0)
      cfg.horizon = (horizon / cfg.et.theta + 1) * cfg.et.theta;
    cfg.x0 = roa.x_star + radius * (half_inv * dir);
    bool ok = false;
    try {
      ok = rollout(cfg, plant, filter, net, theta).metrics.converged;
    } catch (const DivergenceError&) {
      ok = false;
    }
    if (ok) ++rep.converged;
    else rep.failed_points.push_back(i);
  }
  rep.fraction = static_cast<double>(rep.converged) / rep.total;
  return rep;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<double>& V,
                          const std::vector<double>& H) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "k";
  for (int i = 1; i <= traj.n; ++i) out << ",x" << i;
  for (int i = 1; i <= traj.psi; ++i) out << ",xi" << i;
  for (int i = 1; i <= traj.m; ++i) out << ",u" << i;
  out << (traj.w == 1 ? ",omega" : "");
  for (int i = 1; traj.w > 1 && i <= traj.w; ++i) out << ",omega" << i;
  const int v = static_cast<int>(traj.nu.empty() ? 0 : traj.nu[0].size());
  out << (v == 1 ? ",nu" : "");
  for (int i = 1; v > 1 && i <= v; ++i) out << ",nu" << i;
  for (int i = 1; i <= traj.kappa; ++i) out << ",r" << i;
  out << ",alpha,tx,V,H\n";
  out.precision(17);
  const size_t steps = traj.xi.size();
  for (size_t k = 0; k < steps; ++k) {
    out << k;
    for (int i = 0; i < traj.n; ++i) out << ',' << traj.x[k](i);
    for (int i = 0; i < traj.psi; ++i) out << ',' << traj.xi[k](i);
    for (int i = 0; i < traj.m; ++i) out << ',' << traj.u[k](i);
    for (int i = 0; i < traj.w; ++i) out << ',' << traj.omega[k](i);
    for (int i = 0; i < v; ++i) out << ',' << traj.nu[k](i);
    for (int i = 0; i < traj.kappa; ++i) out << ',' << traj.r[k](i);
    out << ',' << traj.alpha[k] << ',' << traj.tx[k] << ','
        << (k < V.size() ? V[k] : 0.0) << ',' << (k < H.size() ? H[k] : 0.0)
        << '\n';
  }
}

}  // namespace ancert
