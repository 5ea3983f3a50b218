// ancert: synthesize / sweep / simulate / verify / roa for aperiodic-sampled
// DNN feedback loops on the pendulum benchmark.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "ancert/interchange.hpp"
#include "ancert/simulator.hpp"
#include "ancert/synthesis.hpp"

namespace fs = std::filesystem;
using namespace ancert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitDivergence = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

struct RunConfig {
  PendulumParams pendulum;
  std::string dnn_path;
  json surrogate;  // {"K":..,"a1":..,"a2":..,"scale":..} or null
  std::string scheme = "event";
  double eps1 = 0.003, eps2 = 0.002, mu = 0.05, g = 500.0;
  int theta = 5;
  double e1 = 0.8, e2 = 0.6;
  int s_bar = 10;
  double delta_rho = 0.35, delta_beta = 1.0;
  std::string objective = "trace";
  double tolerance = 1e-8;
  SweepGrid grid;
  int horizon = 800;
  std::vector<Vec> x0;
  unsigned seed = 0;
  std::string certificate_path;
  std::string out_dir = "out";
};

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  reject_unknown(doc, "config",
                 {"system", "pendulum", "dnn", "surrogate", "scheme",
                  "trigger", "synthesis", "simulation", "certificate",
                  "output_dir"});
  if (doc.value("system", "pendulum") != "pendulum")
    throw ConfigError("system: only the 'pendulum' preset is available");
  if (doc.contains("pendulum")) {
    const json& p = doc.at("pendulum");
    reject_unknown(p, "pendulum",
                   {"Ts", "gravity", "length", "friction", "mass", "phi_bar"});
    cfg.pendulum.Ts = p.value("Ts", cfg.pendulum.Ts);
    cfg.pendulum.gravity = p.value("gravity", cfg.pendulum.gravity);
    cfg.pendulum.length = p.value("length", cfg.pendulum.length);
    cfg.pendulum.friction = p.value("friction", cfg.pendulum.friction);
    cfg.pendulum.mass = p.value("mass", cfg.pendulum.mass);
    cfg.pendulum.phi_bar = p.value("phi_bar", cfg.pendulum.phi_bar);
  }
  if (doc.contains("dnn")) cfg.dnn_path = doc.at("dnn").get<std::string>();
  if (doc.contains("surrogate")) {
    cfg.surrogate = doc.at("surrogate");
    reject_unknown(cfg.surrogate, "surrogate", {"K", "a1", "a2", "scale"});
  }
  cfg.scheme = doc.value("scheme", cfg.scheme);
  if (cfg.scheme != "event" && cfg.scheme != "self" &&
      cfg.scheme != "periodic")
    throw ConfigError("scheme: must be event, self, or periodic");
  if (doc.contains("trigger")) {
    const json& t = doc.at("trigger");
    reject_unknown(t, "trigger",
                   {"eps1", "eps2", "mu", "g", "theta", "e1", "e2", "s_bar"});
    cfg.eps1 = t.value("eps1", cfg.eps1);
    cfg.eps2 = t.value("eps2", cfg.eps2);
    cfg.mu = t.value("mu", cfg.mu);
    cfg.g = t.value("g", cfg.g);
    cfg.theta = t.value("theta", cfg.theta);
    cfg.e1 = t.value("e1", cfg.e1);
    cfg.e2 = t.value("e2", cfg.e2);
    cfg.s_bar = t.value("s_bar", cfg.s_bar);
  }
  if (doc.contains("synthesis")) {
    const json& s = doc.at("synthesis");
    reject_unknown(s, "synthesis",
                   {"delta_rho", "delta_beta", "objective", "tolerance",
                    "sweep"});
    cfg.delta_rho = s.value("delta_rho", cfg.delta_rho);
    cfg.delta_beta = s.value("delta_beta", cfg.delta_beta);
    cfg.objective = s.value("objective", cfg.objective);
    cfg.tolerance = s.value("tolerance", cfg.tolerance);
    if (s.contains("sweep")) {
      const json& g = s.at("sweep");
      reject_unknown(g, "sweep", {"delta_rho", "delta_beta", "theta", "s_bar"});
      if (g.contains("delta_rho"))
        cfg.grid.delta_rho = g.at("delta_rho").get<std::vector<double>>();
      if (g.contains("delta_beta"))
        cfg.grid.delta_beta = g.at("delta_beta").get<std::vector<double>>();
      if (g.contains("theta"))
        cfg.grid.horizon = g.at("theta").get<std::vector<int>>();
      if (g.contains("s_bar"))
        cfg.grid.horizon = g.at("s_bar").get<std::vector<int>>();
    }
  }
  if (cfg.objective != "trace" && cfg.objective != "logdet")
    throw ConfigError("objective: must be trace or logdet");
  if (doc.contains("simulation")) {
    const json& s = doc.at("simulation");
    reject_unknown(s, "simulation", {"horizon", "x0", "seed"});
    cfg.horizon = s.value("horizon", cfg.horizon);
    if (cfg.horizon < 1) throw ConfigError("simulation.horizon must be >= 1");
    if (s.contains("x0"))
      for (const auto& jx : s.at("x0")) cfg.x0.push_back(vec_from_json(jx));
    cfg.seed = s.value("seed", cfg.seed);
  }
  if (doc.contains("certificate"))
    cfg.certificate_path = doc.at("certificate").get<std::string>();
  cfg.out_dir = doc.value("output_dir", cfg.out_dir);
  return cfg;
}

Dnn load_controller(const RunConfig& cfg) {
  if (!cfg.dnn_path.empty()) {
    if (!fs::exists(cfg.dnn_path))
      throw ConfigError("dnn weight file not found: " + cfg.dnn_path);
    return load_dnn(cfg.dnn_path);
  }
  if (!cfg.surrogate.is_null()) {
    const json& s = cfg.surrogate;
    json jk = s.at("K");
    Mat K(jk.size(), jk.at(0).size());
    for (size_t i = 0; i < jk.size(); ++i)
      for (size_t j = 0; j < jk.at(i).size(); ++j)
        K(i, j) = jk.at(i).at(j).get<double>();
    return synthesize_surrogate(K, s.value("a1", 2), s.value("a2", 2),
                                s.value("scale", 0.01));
  }
  throw ConfigError("no controller: provide 'dnn' (weights path) or 'surrogate'");
}

SdpOptions solver_options(const RunConfig& cfg) {
  SdpOptions opts;
  opts.tol = cfg.tolerance;
  if (const char* env = std::getenv("ANCERT_SDP_TOL")) opts.tol = std::atof(env);
  return opts;
}

ObjectiveKind objective_kind(const RunConfig& cfg) {
  return cfg.objective == "logdet" ? ObjectiveKind::LogdetLinearized
                                   : ObjectiveKind::Trace;
}

std::vector<StateRow> pendulum_rows(const Pendulum& pend) {
  RowVec row(2);
  row << 1.0, 0.0;
  return {{row, pend.iqc_hard_radius}};
}

EventSpec make_event_spec(const RunConfig& cfg, const Pendulum& pend,
                          const Dnn& net) {
  EventSpec spec;
  spec.plant = pend.plant;
  spec.filter = pend.filter;
  spec.net = net;
  spec.x_star = Vec::Zero(pend.plant.n());
  spec.delta_rho = cfg.delta_rho;
  spec.delta_beta = cfg.delta_beta;
  spec.eps1 = cfg.eps1;
  spec.eps2 = cfg.eps2;
  spec.theta_l = 1;
  spec.theta_u = cfg.theta;
  spec.state_rows = pendulum_rows(pend);
  return spec;
}

SelfSpec make_self_spec(const RunConfig& cfg, const Pendulum& pend,
                        const Dnn& net) {
  SelfSpec spec;
  spec.plant = pend.plant;
  spec.filter = pend.filter;
  spec.net = net;
  spec.x_star = Vec::Zero(pend.plant.n());
  spec.delta_rho = cfg.delta_rho;
  spec.delta_beta = cfg.delta_beta;
  spec.e1 = cfg.e1;
  spec.e2 = cfg.e2;
  spec.s_bar = cfg.s_bar;
  spec.state_rows = pendulum_rows(pend);
  return spec;
}

void write_certificate(const RunConfig& cfg, const std::string& scheme,
                       const TheoremProgram& prog, const SynthesisResult& r) {
  fs::create_directories(cfg.out_dir);
  json doc = certificate_to_json(prog.vars, r.assignment, r.margins,
                                 to_string(r.status), r.objective);
  doc["scheme"] = scheme;
  doc["objective_kind"] = to_string(r.objective_kind);
  doc["volume_proxy"] = r.volume_proxy;
  write_json_file(cfg.out_dir + "/certificate.json", doc);
  if (r.feasible()) {
    std::ofstream out(cfg.out_dir + "/roa_boundary.csv");
    out << "x1,x2\n";
    out.precision(17);
    for (const Vec& p : roa_boundary(r.roa, 256))
      out << p(0) << ',' << p(1) << '\n';
  }
}

int cmd_synthesize(const RunConfig& cfg, const std::string& scheme) {
  const Pendulum pend = build_pendulum(cfg.pendulum);
  const Dnn net = load_controller(cfg);
  const SdpOptions opts = solver_options(cfg);
  if (scheme == "event") {
    TheoremProgram prog = assemble_theorem1(make_theorem1_input(
        make_event_spec(cfg, pend, net)));
    const SynthesisResult r =
        solve_event(make_theorem1_input(make_event_spec(cfg, pend, net)),
                    objective_kind(cfg), opts);
    write_certificate(cfg, scheme, prog, r);
    std::cout << "status: " << to_string(r.status)
              << "  objective: " << r.objective
              << "  volume_proxy: " << r.volume_proxy << "\n";
    return r.status == SdpStatus::Optimal ? kExitOk : kExitInfeasible;
  }
  TheoremProgram prog = assemble_theorem2(make_theorem2_input(
      make_self_spec(cfg, pend, net)));
  const SynthesisResult r =
      solve_self(make_theorem2_input(make_self_spec(cfg, pend, net)),
                 objective_kind(cfg), opts);
  write_certificate(cfg, scheme, prog, r);
  std::cout << "status: " << to_string(r.status)
            << "  objective: " << r.objective
            << "  volume_proxy: " << r.volume_proxy << "\n";
  return r.status == SdpStatus::Optimal ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const RunConfig& cfg) {
  const Pendulum pend = build_pendulum(cfg.pendulum);
  const Dnn net = load_controller(cfg);
  const SdpOptions opts = solver_options(cfg);
  SweepGrid grid = cfg.grid;
  if (grid.delta_rho.empty()) grid.delta_rho = {cfg.delta_rho};
  if (grid.delta_beta.empty()) grid.delta_beta = {cfg.delta_beta};
  if (grid.horizon.empty())
    grid.horizon = {cfg.scheme == "self" ? cfg.s_bar : cfg.theta};
  const SweepTable table =
      cfg.scheme == "self"
          ? sweep_self(make_self_spec(cfg, pend, net), grid,
                       objective_kind(cfg), opts)
          : sweep_event(make_event_spec(cfg, pend, net), grid,
                        objective_kind(cfg), opts);
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/sweep.csv");
  out << sweep_csv(table, cfg.scheme);
  std::cout << sweep_csv(table, cfg.scheme);
  return table.best >= 0 ? kExitOk : kExitInfeasible;
}

Certificate load_certificate(const RunConfig& cfg) {
  const std::string path = cfg.certificate_path.empty()
                               ? cfg.out_dir + "/certificate.json"
                               : cfg.certificate_path;
  if (!fs::exists(path))
    throw ConfigError("certificate file not found: " + path);
  return certificate_from_json(read_json_file(path));
}

SimConfig make_sim_config(const RunConfig& cfg, const Certificate& cert,
                          const Vec& x0) {
  SimConfig sim;
  sim.scheme = cfg.scheme == "self"
                   ? Scheme::Self
                   : (cfg.scheme == "periodic" ? Scheme::Periodic
                                               : Scheme::Event);
  sim.horizon = cfg.horizon;
  sim.x0 = x0;
  sim.seed = cfg.seed;
  sim.period = cfg.theta;
  sim.et.eps1 = cfg.eps1;
  sim.et.eps2 = cfg.eps2;
  sim.et.mu = cfg.mu;
  sim.et.g = cfg.g;
  sim.et.theta = cfg.theta;
  sim.st.e1 = cfg.e1;
  sim.st.e2 = cfg.e2;
  sim.st.s_bar = cfg.s_bar;
  const Mat Xi1 = cert.assignment.at("Xi1");
  const Mat Xi2 = cert.assignment.at("Xi2");
  sim.et.Xi1 = Xi1;
  sim.et.Xi2 = Xi2;
  sim.st.Xi1 = Xi1;
  sim.st.Xi2 = Xi2;
  if (sim.scheme == Scheme::Event && sim.horizon % sim.et.theta != 0)
    sim.horizon = (sim.horizon / sim.et.theta + 1) * sim.et.theta;
  return sim;
}

int cmd_simulate(const RunConfig& cfg) {
  const Pendulum pend = build_pendulum(cfg.pendulum);
  const Dnn net = load_controller(cfg);
  const Certificate cert = load_certificate(cfg);
  std::vector<Vec> inits = cfg.x0;
  if (inits.empty()) {
    Vec x0(2);
    x0 << 0.19, 3.5;
    inits.push_back(x0);
  }
  const UncertaintyMap theta = [&pend](const Vec& nu) {
    Vec w(nu.size());
    for (int i = 0; i < nu.size(); ++i) w(i) = pend.theta(nu(i));
    return w;
  };
  fs::create_directories(cfg.out_dir);
  for (size_t c = 0; c < inits.size(); ++c) {
    const SimConfig sim = make_sim_config(cfg, cert, inits[c]);
    RolloutResult rr;
    try {
      rr = rollout(sim, pend.plant, pend.filter, net, theta);
    } catch (const DivergenceError& e) {
      std::cerr << "case " << c + 1 << ": " << e.what() << "\n";
      return kExitDivergence;
    }
    std::vector<double> V, H;
    if (cert.assignment.count("P"))
      V = lyapunov_column(rr.traj, cert.assignment.at("P"), sim.x_star.size()
                          ? sim.x_star : Vec::Zero(rr.traj.n));
    if (cert.assignment.count("R")) {
      std::vector<int> bounds;
      if (sim.scheme == Scheme::Event)
        for (int k = 0; k < sim.horizon; k += sim.et.theta)
          bounds.push_back(k);
      else
        bounds = rr.traj.tx_instants;
      H = looped_function_column(rr.traj, cert.assignment.at("R"),
                                 cert.assignment.at("T1"),
                                 cert.assignment.at("T2"), bounds,
                                 Vec::Zero(rr.traj.n));
    }
    const std::string tag = "case" + std::to_string(c + 1);
    write_trajectory_csv(cfg.out_dir + "/trajectory_" + tag + ".csv", rr.traj,
                         V, H);
    std::ofstream mj(cfg.out_dir + "/metrics_" + tag + ".json");
    mj << metrics_json(rr.metrics);
    std::cout << tag << ": transmissions " << rr.metrics.transmissions << "/"
              << rr.metrics.samples << "  efficiency "
              << rr.metrics.efficiency_bp / 100.0 << "%  converged "
              << (rr.metrics.converged ? "yes" : "no") << "\n";
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const Pendulum pend = build_pendulum(cfg.pendulum);
  const Dnn net = load_controller(cfg);
  const Certificate cert = load_certificate(cfg);
  const UncertaintyMap theta = [&pend](const Vec& nu) {
    Vec w(nu.size());
    for (int i = 0; i < nu.size(); ++i) w(i) = pend.theta(nu(i));
    return w;
  };
  bool all_ok = true;

  // 1. Re-assemble and re-check the LMIs against the stored assignment.
  std::vector<LmiReport> margins;
  if (cfg.scheme == "self") {
    TheoremProgram prog = assemble_theorem2(
        make_theorem2_input(make_self_spec(cfg, pend, net)));
    margins = feasibility_oracle(prog.lmis, cert.assignment, 1e-7);
  } else {
    TheoremProgram prog = assemble_theorem1(
        make_theorem1_input(make_event_spec(cfg, pend, net)));
    margins = feasibility_oracle(prog.lmis, cert.assignment, 1e-7);
  }
  for (const auto& m : margins) all_ok = all_ok && m.ok;
  std::cout << "feasibility_oracle: " << (all_ok ? "pass" : "FAIL") << "\n";

  // 2. Simulate from the configured (or default) initial state and monitor.
  Vec x0(2);
  if (!cfg.x0.empty()) x0 = cfg.x0.front();
  else x0 << 0.19, 3.5;
  const SimConfig sim = make_sim_config(cfg, cert, x0);
  RolloutResult rr;
  try {
    rr = rollout(sim, pend.plant, pend.filter, net, theta);
  } catch (const DivergenceError& e) {
    std::cerr << e.what() << "\n";
    return kExitDivergence;
  }
  const Scheme sch = sim.scheme;
  const LyapunovReport lya = lyapunov_monitor(
      rr.traj, cert.assignment, sch, sim.et.theta, Vec::Zero(rr.traj.n));
  std::cout << "lyapunov_monitor: " << (lya.pass ? "pass" : "FAIL")
            << "  (max boundary |H| = " << lya.max_boundary_h << ")\n";
  const IqcReport iqc = iqc_monitor(rr.traj, pend.filter, pend.phi_bar);
  std::cout << "iqc_monitor: " << (iqc.pass ? "pass" : "FAIL")
            << "  (min partial sum = " << iqc.min_partial << ")\n";
  all_ok = all_ok && lya.pass && iqc.pass;

  // 3. ROA validation on the certified ellipsoid.
  RoaEllipsoid roa;
  roa.P1 = cert.assignment.at("P").topLeftCorner(2, 2);
  roa.x_star = Vec::Zero(2);
  const RoaReport rep = roa_validation(roa, sim, pend.plant, pend.filter, net,
                                       theta, 16, cfg.horizon);
  std::cout << "roa_validation: " << rep.converged << "/" << rep.total
            << " converged\n";
  all_ok = all_ok && rep.fraction == 1.0;
  return all_ok ? kExitOk : kExitInfeasible;
}

int cmd_roa(const RunConfig& cfg) {
  const Certificate cert = load_certificate(cfg);
  RoaEllipsoid roa;
  roa.P1 = cert.assignment.at("P").topLeftCorner(2, 2);
  roa.x_star = Vec::Zero(2);
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/roa_boundary.csv");
  out << "x1,x2\n";
  out.precision(17);
  for (const Vec& p : roa_boundary(roa, 256)) out << p(0) << ',' << p(1) << '\n';
  std::cout << "wrote " << cfg.out_dir << "/roa_boundary.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification and synthesis for aperiodic-sampled DNN feedback loops"};
  app.require_subcommand(1);

  std::string config_path, dnn_path, out_dir, scheme, objective;
  int theta = 0, s_bar = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--dnn", dnn_path, "DNN weight file (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--scheme", scheme, "event | self | periodic");
  app.add_option("--theta", theta, "ET sampling spacing / upper bound");
  app.add_option("--s-bar", s_bar, "ST maximum inter-transmission gap");
  app.add_option("--objective", objective, "trace | logdet")
      ->check(CLI::IsMember({"trace", "logdet"}));

  auto* sub_se = app.add_subcommand("synthesize-event", "Theorem-1 synthesis");
  auto* sub_ss = app.add_subcommand("synthesize-self", "Theorem-2 synthesis");
  auto* sub_sw = app.add_subcommand("sweep", "parameter sweep");
  auto* sub_sim = app.add_subcommand("simulate", "closed-loop rollout");
  auto* sub_ver = app.add_subcommand("verify", "certificate + monitor checks");
  auto* sub_roa = app.add_subcommand("roa", "ellipsoid boundary export");

  CLI11_PARSE(app, argc, argv);

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      if (!fs::exists(config_path))
        throw ConfigError("config file not found: " + config_path);
      try {
        doc = read_json_file(config_path);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
      }
    }
    RunConfig cfg = parse_config(doc);
    if (!dnn_path.empty()) cfg.dnn_path = dnn_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!scheme.empty()) cfg.scheme = scheme;
    if (theta > 0) cfg.theta = theta;
    if (s_bar > 0) cfg.s_bar = s_bar;
    if (!objective.empty()) cfg.objective = objective;

    if (sub_se->parsed()) { cfg.scheme = "event"; return cmd_synthesize(cfg, "event"); }
    if (sub_ss->parsed()) { cfg.scheme = "self"; return cmd_synthesize(cfg, "self"); }
    if (sub_sw->parsed()) return cmd_sweep(cfg);
    if (sub_sim->parsed()) return cmd_simulate(cfg);
    if (sub_ver->parsed()) return cmd_verify(cfg);
    if (sub_roa->parsed()) return cmd_roa(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
