// Closed-loop rollout (plant + Theta + filter + DNN + trigger + ZOH),
// communication metrics, certificate monitors, and trajectory export.
#pragma once

#include <stdexcept>

#include "ancert/plant.hpp"
#include "ancert/synthesis.hpp"
#include "ancert/triggers.hpp"

namespace ancert {

enum class Scheme { Event, Self, Periodic };
std::string to_string(Scheme s);

// omega = theta(nu), elementwise static map.
using UncertaintyMap = std::function<Vec(const Vec&)>;

struct SimConfig {
  Scheme scheme = Scheme::Event;
  int horizon = 800;
  Vec x0;
  Vec x_star;  // empty -> zeros
  EventTriggerParams et;
  SelfTriggerParams st;
  int period = 1;  // Scheme::Periodic
  unsigned seed = 0;
  double blowup_guard = 1e6;
  double conv_tol = 1e-3;
};

struct Trajectory {
  // x has horizon+1 entries (final state included); the per-step columns
  // have horizon entries for k = 0..horizon-1.
  std::vector<Vec> x, xi, u, omega, nu, r;
  std::vector<double> alpha;
  std::vector<int> tx;  // 1 at transmission steps
  std::vector<int> tx_instants;
  int n = 0, psi = 0, m = 0, w = 0, kappa = 0;
};

struct Metrics {
  int samples = 0, transmissions = 0;
  double efficiency = 0.0;  // 1 - transmissions/samples
  // Exact half-up hundredths of a percent: 7763 means 77.63%.
  int efficiency_bp = 0;
  bool converged = false;
  int max_gap = 0;  // largest inter-transmission interval (steps)
};
int efficiency_basis_points(int samples, int transmissions);
std::string metrics_json(const Metrics& m);

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(int k)
      : std::runtime_error("state blow-up at step " + std::to_string(k)),
        step(k) {}
  int step;
};

struct RolloutResult {
  Trajectory traj;
  Metrics metrics;
};

RolloutResult rollout(const SimConfig& cfg, const Plant& plant,
                      const IqcFilter& filter, const Dnn& net,
                      const UncertaintyMap& theta);

// V(eta(k)) = ||Col(x - x*, xi)||^2_P per step (horizon+1 values when the
// final filter state is reconstructable; we emit horizon values).
std::vector<double> lyapunov_column(const Trajectory& traj, const Mat& P,
                                    const Vec& x_star);

// Looped-function value at sample boundaries (zero elsewhere): the proof's
// three-term H with interval ends at consecutive entries of `boundaries`.
std::vector<double> looped_function_column(const Trajectory& traj, const Mat& R,
                                           const Mat& T1, const Mat& T2,
                                           const std::vector<int>& boundaries,
                                           const Vec& x_star);

struct LyapunovReport {
  bool pass = true;
  std::vector<int> violations;  // transmission indices with non-decrease
  bool nonstrict_at_equilibrium = false;
  double max_boundary_h = 0.0;  // max |H| over sample boundaries
  bool h_identity_ok = true;
};
// ET: V + (theta-1) alpha strictly decreasing over consecutive
// transmissions; ST: V decreasing; plus the H = 0 boundary identity.
LyapunovReport lyapunov_monitor(const Trajectory& traj, const Assignment& cert,
                                Scheme scheme, int theta, const Vec& x_star);

struct IqcReport {
  bool pass = true;
  double min_partial = 0.0;
  int min_index = -1;
  int sector_exit = -1;  // first step with |nu| beyond the sector radius
};
IqcReport iqc_monitor(const Trajectory& traj, const IqcFilter& filter,
                      double sector_radius);

struct RoaReport {
  int total = 0, converged = 0;
  double fraction = 0.0;
  std::vector<int> failed_points;
};
// Deterministic boundary + interior sampling of the solved ellipsoid; rolls
// each point out and counts convergence to x* within cfg.conv_tol.
RoaReport roa_validation(const RoaEllipsoid& roa, const SimConfig& base,
                         const Plant& plant, const IqcFilter& filter,
                         const Dnn& net, const UncertaintyMap& theta,
                         int n_points, int horizon);

// CSV with header k,x1..xn,xi1..,u1..,omega,nu,r1,r2,alpha,tx,V,H
// (vector columns indexed when their dimension exceeds 1).
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<double>& V,
                          const std::vector<double>& H);

}  // namespace ancert
