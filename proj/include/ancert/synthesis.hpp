// ROA synthesis: turn the assembled theorem LMIs into conic programs with a
// volume objective, run (delta_rho, delta_beta, theta / s_bar) sweeps, and
// extract triggering matrices and the ROA ellipsoid.
#pragma once

#include "ancert/lmi.hpp"
#include "ancert/sdp.hpp"
#include "ancert/triggers.hpp"

namespace ancert {

struct RoaEllipsoid {
  Mat P1;      // ||x - x_star||^2_{P1} <= 1
  Vec x_star;
};

enum class ObjectiveKind { Trace, LogdetLinearized };
std::string to_string(ObjectiveKind k);

struct SynthesisResult {
  SdpStatus status = SdpStatus::MaxIter;
  Assignment assignment;
  double objective = 0.0;  // trace(P1) or log det(P1) per objective_kind
  ObjectiveKind objective_kind = ObjectiveKind::Trace;
  RoaEllipsoid roa;
  Mat Xi1, Xi2;
  std::vector<LmiReport> margins;
  // det(P1)^(-1/2): proportional to the ellipsoid area/volume.
  double volume_proxy = 0.0;
  int iterations = 0;  // inner solver iterations, summed over outer passes
  bool feasible() const {
    return status == SdpStatus::Optimal || status == SdpStatus::Inaccurate;
  }
};

// Context construction shared by direct solves and sweeps. delta_rho is the
// first-layer preactivation halfwidth; delta_beta is the prescribed local
// upper sector bound on the first layer (sigma_1 = delta_beta * 1).
struct EventSpec {
  Plant plant;
  IqcFilter filter;
  Dnn net;
  Vec x_star;
  double delta_rho = 0.35, delta_beta = 1.0;
  double eps1 = 0.003, eps2 = 0.002;
  int theta_l = 1, theta_u = 5;
  std::vector<StateRow> state_rows;
};
Theorem1Input make_theorem1_input(const EventSpec& spec);

struct SelfSpec {
  Plant plant;
  IqcFilter filter;
  Dnn net;
  Vec x_star;
  double delta_rho = 0.45, delta_beta = 1.0;
  double e1 = 0.8, e2 = 0.6;
  int s_bar = 10;
  std::vector<StateRow> state_rows;
};
Theorem2Input make_theorem2_input(const SelfSpec& spec);

SynthesisResult solve_event(const Theorem1Input& in,
                            ObjectiveKind kind = ObjectiveKind::Trace,
                            const SdpOptions& opts = {});
SynthesisResult solve_self(const Theorem2Input& in,
                           ObjectiveKind kind = ObjectiveKind::Trace,
                           const SdpOptions& opts = {});

// Parameter sweep. For the event scheme `horizon` holds theta_u values; for
// the self scheme it holds s_bar values.
struct SweepGrid {
  std::vector<double> delta_rho, delta_beta;
  std::vector<int> horizon;
};

struct SweepEntry {
  double delta_rho = 0.0, delta_beta = 0.0;
  int horizon = 0;
  SdpStatus status = SdpStatus::MaxIter;
  double objective = 0.0, volume_proxy = 0.0;
  double worst_margin = 0.0;
};

struct SweepTable {
  std::vector<SweepEntry> entries;
  int best = -1;  // argmax volume proxy among feasible; -1 if none
};

SweepTable sweep_event(const EventSpec& base, const SweepGrid& grid,
                       ObjectiveKind kind = ObjectiveKind::Trace,
                       const SdpOptions& opts = {});
SweepTable sweep_self(const SelfSpec& base, const SweepGrid& grid,
                      ObjectiveKind kind = ObjectiveKind::Trace,
                      const SdpOptions& opts = {});
std::string sweep_csv(const SweepTable& table, const std::string& scheme);

// Boundary trace for n = 2: points x_star + P1^(-1/2) (cos t, sin t).
std::vector<Vec> roa_boundary(const RoaEllipsoid& roa, int samples);

// Trigger parameter bundles read off a solved certificate.
EventTriggerParams event_trigger_from(const SynthesisResult& r, double eps1,
                                      double eps2, double mu, double g,
                                      int theta);
SelfTriggerParams self_trigger_from(const SynthesisResult& r, double e1,
                                    double e2, int s_bar);

}  // namespace ancert
