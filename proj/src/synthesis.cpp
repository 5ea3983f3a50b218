#include "ancert/synthesis.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ancert {

std::string to_string(ObjectiveKind k) {
  return k == ObjectiveKind::Trace ? "trace" : "logdet_linearized";
}

namespace {

DnnRelaxation relax_with_beta(const Dnn& net, const Vec& x_star,
                              double delta_rho, double delta_beta) {
  const int a1 = static_cast<int>(net.W.front().rows());
  DnnRelaxation rel =
      relax_dnn(net, x_star, Vec::Constant(a1, delta_rho));
  // Prescribed local first-layer upper bound sigma_1 = delta_beta * 1.
  rel.sigma.head(a1).setConstant(delta_beta);
  return rel;
}

Mat p1_of(const TheoremProgram& prog, const Assignment& a) {
  return a.at("P").topLeftCorner(prog.n, prog.n);
}

double volume_proxy_of(const Mat& P1) {
  const double d = P1.determinant();
  return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
}

SdpObjective trace_objective(const TheoremProgram& prog) {
  SdpObjective obj;
  Mat C = Mat::Zero(prog.z, prog.z);
  C.topLeftCorner(prog.n, prog.n).setIdentity();
  obj.coeffs["P"] = C;
  return obj;
}

SynthesisResult solve_program(const TheoremProgram& prog, ObjectiveKind kind,
                              const SdpOptions& opts_in) {
  SynthesisResult res;
  res.objective_kind = kind;
  SdpOptions opts = opts_in;
  SdpObjective obj = trace_objective(prog);

  SdpResult sr = solve_sdp(prog.vars, prog.lmis, obj, opts);
  res.iterations = sr.iterations;

  if (kind == ObjectiveKind::LogdetLinearized &&
      (sr.status == SdpStatus::Optimal || sr.status == SdpStatus::Inaccurate)) {
    // Iterate min tr(P1_prev^{-1} P1), warm-started, to a fixed point.
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 20; ++it) {
      Mat P1 = p1_of(prog, sr.assignment);
      Mat C = Mat::Zero(prog.z, prog.z);
      C.topLeftCorner(prog.n, prog.n) =
          P1.llt().solve(Mat::Identity(prog.n, prog.n));
      obj.coeffs["P"] = symmetrize(C);
      opts.warm_start = sr.assignment;
      SdpResult next = solve_sdp(prog.vars, prog.lmis, obj, opts);
      res.iterations += next.iterations;
      if (next.status != SdpStatus::Optimal &&
          next.status != SdpStatus::Inaccurate)
        break;
      sr = next;
      const double cur = std::log(p1_of(prog, sr.assignment).determinant());
      if (std::abs(cur - prev) < 1e-6 * std::max(1.0, std::abs(prev))) break;
      prev = cur;
    }
  }

  res.status = sr.status;
  res.assignment = sr.assignment;
  if (sr.status == SdpStatus::Optimal || sr.status == SdpStatus::Inaccurate) {
    res.margins = feasibility_oracle(prog.lmis, sr.assignment, 1e-7);
    bool ok = true;
    for (const auto& r : res.margins) ok = ok && r.ok;
    // A certificate that fails its own feasibility check is not usable,
    // whatever the solver claimed.
    if (!ok) res.status = SdpStatus::MaxIter;
    const Mat P1 = p1_of(prog, sr.assignment);
    res.roa.P1 = P1;
    res.roa.x_star = Vec::Zero(prog.n);
    res.volume_proxy = volume_proxy_of(P1);
    res.objective = kind == ObjectiveKind::Trace
                        ? P1.trace()
                        : std::log(std::max(P1.determinant(), 1e-300));
    res.Xi1 = sr.assignment.at("Xi1");
    res.Xi2 = sr.assignment.at("Xi2");
  }
  return res;
}

}  // namespace

Theorem1Input make_theorem1_input(const EventSpec& spec) {
  Theorem1Input in;
  in.sys = build_augmented(spec.plant, spec.filter);
  in.dnn = relax_with_beta(spec.net, spec.x_star, spec.delta_rho,
                           spec.delta_beta);
  in.M_theta = spec.filter.M;
  in.eps1 = spec.eps1;
  in.eps2 = spec.eps2;
  in.theta_l = spec.theta_l;
  in.theta_u = spec.theta_u;
  in.state_rows = spec.state_rows;
  return in;
}

Theorem2Input make_theorem2_input(const SelfSpec& spec) {
  Theorem2Input in;
  in.sys = build_augmented(spec.plant, spec.filter);
  in.dnn = relax_with_beta(spec.net, spec.x_star, spec.delta_rho,
                           spec.delta_beta);
  in.M_theta = spec.filter.M;
  in.e1 = spec.e1;
  in.e2 = spec.e2;
  in.s_bar = spec.s_bar;
  in.state_rows = spec.state_rows;
  return in;
}

SynthesisResult solve_event(const Theorem1Input& in, ObjectiveKind kind,
                            const SdpOptions& opts) {
  TheoremProgram prog = assemble_theorem1(in);
  SynthesisResult res = solve_program(prog, kind, opts);
  if (res.feasible()) res.roa.x_star = Vec::Zero(prog.n);
  return res;
}

SynthesisResult solve_self(const Theorem2Input& in, ObjectiveKind kind,
                           const SdpOptions& opts) {
  TheoremProgram prog = assemble_theorem2(in);
  return solve_program(prog, kind, opts);
}

namespace {

SweepEntry entry_from(const SynthesisResult& r, double dr, double db, int h) {
  SweepEntry e;
  e.delta_rho = dr;
  e.delta_beta = db;
  e.horizon = h;
  e.status = r.status;
  e.objective = r.objective;
  e.volume_proxy = r.volume_proxy;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : r.margins) {
    const double margin = m.name.find("inclusion") != std::string::npos
                              ? m.min_eig
                              : -m.max_eig;
    worst = std::min(worst, margin);
  }
  e.worst_margin = r.margins.empty() ? 0.0 : worst;
  return e;
}

// Argmax volume proxy among feasible entries; ties (within 1e-9) broken by
// cheaper communication: smaller theta for ET, larger s_bar for ST.
int argmax_entry(const std::vector<SweepEntry>& entries, bool prefer_larger_h) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    const auto& e = entries[i];
    if (e.status != SdpStatus::Optimal && e.status != SdpStatus::Inaccurate)
      continue;
    if (best < 0) { best = i; continue; }
    const auto& b = entries[best];
    if (e.volume_proxy > b.volume_proxy + 1e-9) best = i;
    else if (std::abs(e.volume_proxy - b.volume_proxy) <= 1e-9) {
      if (prefer_larger_h ? e.horizon > b.horizon : e.horizon < b.horizon)
        best = i;
    }
  }
  return best;
}

}  // namespace

SweepTable sweep_event(const EventSpec& base, const SweepGrid& grid,
                       ObjectiveKind kind, const SdpOptions& opts) {
  if (grid.delta_rho.empty() || grid.delta_beta.empty() ||
      grid.horizon.empty())
    throw std::invalid_argument("sweep grid must be nonempty");
  SweepTable table;
  for (double dr : grid.delta_rho)
    for (double db : grid.delta_beta)
      for (int th : grid.horizon) {
        EventSpec spec = base;
        spec.delta_rho = dr;
        spec.delta_beta = db;
        spec.theta_u = th;
        SynthesisResult r;
        try {
          r = solve_event(make_theorem1_input(spec), kind, opts);
        } catch (const std::exception&) {
          r.status = SdpStatus::Infeasible;
        }
        table.entries.push_back(entry_from(r, dr, db, th));
      }
  table.best = argmax_entry(table.entries, /*prefer_larger_h=*/false);
  return table;
}

SweepTable sweep_self(const SelfSpec& base, const SweepGrid& grid,
                      ObjectiveKind kind, const SdpOptions& opts) {
  if (grid.delta_rho.empty() || grid.delta_beta.empty() ||
      grid.horizon.empty())
    throw std::invalid_argument("sweep grid must be nonempty");
  SweepTable table;
  for (double dr : grid.delta_rho)
    for (double db : grid.delta_beta)
      for (int sb : grid.horizon) {
        SelfSpec spec = base;
        spec.delta_rho = dr;
        spec.delta_beta = db;
        spec.s_bar = sb;
        SynthesisResult r;
        try {
          r = solve_self(make_theorem2_input(spec), kind, opts);
        } catch (const std::exception&) {
          r.status = SdpStatus::Infeasible;
        }
        table.entries.push_back(entry_from(r, dr, db, sb));
      }
  table.best = argmax_entry(table.entries, /*prefer_larger_h=*/true);
  return table;
}

std::string sweep_csv(const SweepTable& table, const std::string& scheme) {
  std::ostringstream out;
  const char* h = scheme == "self" ? "s_bar" : "theta";
  out << "delta_rho,delta_beta," << h
      << ",status,objective,volume_proxy,worst_margin,best\n";
  for (int i = 0; i < static_cast<int>(table.entries.size()); ++i) {
    const auto& e = table.entries[i];
    out << e.delta_rho << ',' << e.delta_beta << ',' << e.horizon << ','
        << to_string(e.status) << ',' << e.objective << ',' << e.volume_proxy
        << ',' << e.worst_margin << ',' << (i == table.best ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<Vec> roa_boundary(const RoaEllipsoid& roa, int samples) {
  if (roa.P1.rows() != 2 || roa.P1.cols() != 2)
    throw std::invalid_argument("roa_boundary: boundary tracing needs n = 2");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(roa.P1));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("roa_boundary: P1 must be positive definite");
  const Mat half_inv = es.eigenvectors() *
                       es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  std::vector<Vec> pts;
  pts.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * M_PI * i / samples;
    Vec dir(2);
    dir << std::cos(t), std::sin(t);
    pts.push_back(roa.x_star + half_inv * dir);
  }
  return pts;
}

EventTriggerParams event_trigger_from(const SynthesisResult& r, double eps1,
                                      double eps2, double mu, double g,
                                      int theta) {
  EventTriggerParams p;
  p.eps1 = eps1;
  p.eps2 = eps2;
  p.mu = mu;
  p.g = g;
  p.theta = theta;
  p.Xi1 = r.Xi1;
  p.Xi2 = r.Xi2;
  return p;
}

SelfTriggerParams self_trigger_from(const SynthesisResult& r, double e1,
                                    double e2, int s_bar) {
  SelfTriggerParams p;
  p.e1 = e1;
  p.e2 = e2;
  p.s_bar = s_bar;
  p.Xi1 = r.Xi1;
  p.Xi2 = r.Xi2;
  return p;
}

}  // namespace ancert
