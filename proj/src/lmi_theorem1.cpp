// Event-triggered certification LMIs (Theorem 1): zeta(k) = Col(eta, m,
// omega, x_theta_j, x_theta_j+1, avg1, avg2, x_kq), block LMI
// [[G + theta*amalg_i, theta*N_i], [*, -theta*Diag(T_i, 3T_i)]] < 0 at both
// spacing vertices plus the first-layer inclusion LMIs.
#include <set>
#include <stdexcept>

#include "ancert/lmi.hpp"

namespace ancert {

namespace {

struct Thm1Symbols {
  int n, z, a, w, nbar;
  Mat L1, L2, L3, L4, L5, L6, L7, L8;
  Mat Lambda1, Lambda2, Sigma1;
  Mat Knext;  // A L1 + B Sigma1 Lambda1 (the eta(k+1) row map)
  Mat G1, G2, G3;
  Mat R1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R1_3, R2_3;
};

Mat col2(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}
Mat col4(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
  return col2(col2(a, b), col2(c, d));
}

Thm1Symbols build_symbols(const AugmentedSystem& sys,
                          const DnnRelaxation& dnn) {
  Thm1Symbols s;
  s.n = sys.n;
  s.z = sys.z();
  s.a = dnn.a;
  s.w = sys.w;
  const int n = s.n;
  const std::vector<int> dims{s.z, s.a, s.w, n, n, n, n, n};
  s.nbar = s.z + s.a + s.w + 5 * n;

  s.L1 = selector(dims, 1);
  s.L2 = selector(dims, 2);
  s.L3 = selector(dims, 3);
  s.L4 = selector(dims, 4);
  s.L5 = selector(dims, 5);
  s.L6 = selector(dims, 6);
  s.L7 = selector(dims, 7);
  s.L8 = selector(dims, 8);

  s.Lambda2 = Mat::Zero(n, s.z);
  s.Lambda2.leftCols(n).setIdentity();

  s.Sigma1 = Mat::Zero(sys.m + s.w, n + s.a + s.w);
  s.Sigma1.block(0, 0, sys.m, n) = dnn.iso.Pi_ux;
  s.Sigma1.block(0, n, sys.m, s.a) = dnn.iso.Pi_um;
  s.Sigma1.block(sys.m, n + s.a, s.w, s.w).setIdentity();

  s.Lambda1 = col2(col2(s.L8, s.L2), s.L3);

  s.Knext = sys.A * s.L1 + sys.B * s.Sigma1 * s.Lambda1;
  const Mat xk = s.Lambda2 * s.L1;      // x(k) - x*
  const Mat xnext = s.Lambda2 * s.Knext;  // x(k+1) - x*

  s.G1 = xnext - xk;
  s.G2 = sys.C * s.L1 + sys.D * s.Sigma1 * s.Lambda1;
  s.G3 = col2(dnn.iso.Pi_px * s.L8 + dnn.iso.Pi_pm * s.L2, s.L2);

  const Mat Z = Mat::Zero(n, s.nbar);
  s.R1_3 = xnext - s.L4;
  s.R2_3 = s.L5 - xnext;
  s.R1 = col4(s.L4, s.L5, s.R1_3, s.L6 + s.R1_3);
  s.R2 = col4(-s.L4, -s.L5, s.R2_3, s.L7 - s.L5 - xk);
  s.R3 = col4(s.L4, s.L5, Z, s.L6);
  s.R4 = col4(s.L4, s.L5, Z, s.L7);
  s.R5 = col4(Z, Z, xk - s.L4, s.L6 - s.L4);
  s.R6 = col4(Z, Z, s.L5 - xk, s.L7 - s.L5);
  s.R7 = s.R2 - s.R6;
  s.R8 = s.R1 - s.R5;
  // Second block of each epsilon is x_b + x_a - 2*average, as required by the
  // free-matrix summation inequality (it must vanish on a one-point interval).
  s.R9 = col2(xk - s.L4, xk + s.L4 - 2.0 * s.L6);
  s.R10 = col2(s.L5 - xk, s.L5 + xk - 2.0 * s.L7);
  return s;
}

}  // namespace

TheoremProgram assemble_theorem1(const Theorem1Input& in) {
  const AugmentedSystem& sys = in.sys;
  const DnnRelaxation& dnn = in.dnn;
  if (dnn.n != sys.n)
    throw std::invalid_argument("theorem1: dnn input dim != plant states");
  if (dnn.m != sys.m)
    throw std::invalid_argument("theorem1: dnn output dim != plant inputs");
  if (in.theta_l < 1 || in.theta_u < in.theta_l)
    throw std::invalid_argument("theorem1: need 1 <= theta_l <= theta_u");
  if (in.M_theta.rows() != sys.kappa || in.M_theta.cols() != sys.kappa)
    throw std::invalid_argument("theorem1: M_theta must be kappa x kappa");

  Thm1Symbols s = build_symbols(sys, dnn);
  const int n = s.n, nbar = s.nbar;

  TheoremProgram prog;
  prog.n = n;
  prog.z = s.z;
  prog.a = s.a;
  prog.w = s.w;
  prog.dim_zeta = nbar;
  prog.vars = {
      {"P", s.z, s.z, VarKind::SymPsd},
      {"T1", n, n, VarKind::SymPsd},
      {"T2", n, n, VarKind::SymPsd},
      {"Xi1", n, n, VarKind::SymPsd},
      {"Xi2", n, n, VarKind::SymPsd},
      {"R", 4 * n, 4 * n, VarKind::Free},
      {"N1", nbar, 2 * n, VarKind::Free},
      {"N2", nbar, 2 * n, VarKind::Free},
      {"gamma", s.a, 1, VarKind::NonnegVector},
  };

  const int d = nbar + 2 * n;
  Mat Ext = Mat::Zero(nbar, d);
  Ext.leftCols(nbar).setIdentity();
  Mat Tail = Mat::Zero(2 * n, d);
  Tail.rightCols(2 * n).setIdentity();
  const Mat Tail1 = Tail.topRows(n);
  const Mat Tail2 = Tail.bottomRows(n);

  // Extended (zero-padded) copies of the zeta-space maps.
  const Mat L1e = s.L1 * Ext, L4e = s.L4 * Ext, L8e = s.L8 * Ext;
  const Mat Knexte = s.Knext * Ext;
  const Mat G1e = s.G1 * Ext, G2e = s.G2 * Ext, G3e = s.G3 * Ext;
  const Mat R1e = s.R1 * Ext, R2e = s.R2 * Ext, R3e = s.R3 * Ext,
            R4e = s.R4 * Ext, R5e = s.R5 * Ext, R6e = s.R6 * Ext,
            R7e = s.R7 * Ext, R8e = s.R8 * Ext, R9e = s.R9 * Ext,
            R10e = s.R10 * Ext;
  // Sector image S * G3 split into its two a-row halves (Lemma 1).
  const Mat P_half = G3e.topRows(s.a);
  const Mat M_half = G3e.bottomRows(s.a);
  const Mat U_half = Mat(dnn.sigma.asDiagonal()) * P_half - M_half;
  const Mat V_half = M_half - Mat(dnn.rho.asDiagonal()) * P_half;

  const VarSpec &vP = prog.vars[0], &vT1 = prog.vars[1], &vT2 = prog.vars[2],
                &vXi1 = prog.vars[3], &vXi2 = prog.vars[4], &vR = prog.vars[5],
                &vN1 = prog.vars[6], &vN2 = prog.vars[7],
                &vGamma = prog.vars[8];

  std::set<int> vertices{in.theta_l, in.theta_u};
  for (int theta : vertices) {
    for (int iota = 1; iota <= 2; ++iota) {
      AffineLmi lmi;
      lmi.name = "thm1_main_theta" + std::to_string(theta) + "_iota" +
                 std::to_string(iota);
      lmi.size = d;
      lmi.sense = Sense::NegDef;
      lmi.constant = G2e.transpose() * in.M_theta * G2e;

      // G: Lyapunov difference, looped-function differences, IQC, DNN
      // sector, free multipliers and the trigger form Q.
      add_sym_quadratic(lmi, vP, Knexte, 1.0);
      add_sym_quadratic(lmi, vP, L1e, -1.0);
      add_sym_quadratic(lmi, vT2, G1e, 1.0);
      add_sym_quadratic(lmi, vT1, G1e, -1.0);
      add_gamma_quadratic(lmi, vGamma, U_half, V_half, 1.0);
      add_free_sym_product(lmi, vR, R1e, R2e, 1.0);
      add_free_sym_product(lmi, vR, R5e, R6e, -1.0);
      add_free_sym_product(lmi, vN1, Ext, R9e, 1.0);
      add_free_sym_product(lmi, vN2, Ext, R10e, 1.0);
      add_sym_quadratic(lmi, vXi1, L4e, in.eps1);
      add_sym_quadratic(lmi, vXi1, L8e, in.eps2);
      add_sym_quadratic(lmi, vXi2, L4e - L8e, -1.0);

      // theta * amalg_iota
      const double th = static_cast<double>(theta);
      if (iota == 1) {
        add_sym_quadratic(lmi, vT2, G1e, th);
        add_free_sym_product(lmi, vR, R3e, R7e, th);
      } else {
        add_sym_quadratic(lmi, vT1, G1e, th);
        add_free_sym_product(lmi, vR, R8e, R4e, th);
      }

      // Off-diagonal theta*N_iota and the -theta*Diag(T, 3T) corner.
      const VarSpec& vN = iota == 1 ? vN1 : vN2;
      const VarSpec& vT = iota == 1 ? vT1 : vT2;
      add_free_sym_product(lmi, vN, Ext, Tail, th);
      add_sym_quadratic(lmi, vT, Tail1, -th);
      add_sym_quadratic(lmi, vT, Tail2, -3.0 * th);

      prog.lmis.push_back(std::move(lmi));
    }
  }

  // First-layer inclusion LMIs: [[(pbar - p*)^2, [W1_row, 0]], [*, P]] >= 0.
  auto add_inclusion = [&](const std::string& name, const RowVec& row_x,
                           double bound) {
    AffineLmi lmi;
    lmi.name = name;
    lmi.size = 1 + s.z;
    lmi.sense = Sense::Psd;
    lmi.constant = Mat::Zero(lmi.size, lmi.size);
    lmi.constant(0, 0) = bound * bound;
    RowVec row_ext = RowVec::Zero(s.z);
    row_ext.head(n) = row_x;
    lmi.constant.block(0, 1, 1, s.z) = row_ext;
    lmi.constant.block(1, 0, s.z, 1) = row_ext.transpose();
    Mat K = Mat::Zero(s.z, lmi.size);
    K.rightCols(s.z).setIdentity();
    add_sym_quadratic(lmi, vP, K, 1.0);
    prog.lmis.push_back(std::move(lmi));
  };
  for (int j = 0; j < dnn.a1; ++j)
    add_inclusion("thm1_inclusion_p1_row" + std::to_string(j + 1),
                  dnn.W1.row(j), dnn.p1_bar[j] - dnn.p1_star[j]);
  for (size_t i = 0; i < in.state_rows.size(); ++i)
    add_inclusion("thm1_inclusion_state_row" + std::to_string(i + 1),
                  in.state_rows[i].first, in.state_rows[i].second);

  // Printed-symbol registry.
  prog.symbols = {
      {"L1", s.L1},       {"L2", s.L2},
      {"L3", s.L3},       {"L4", s.L4},
      {"L5", s.L5},       {"L6", s.L6},
      {"L7", s.L7},       {"L8", s.L8},
      {"Lambda1", s.Lambda1}, {"Lambda2", s.Lambda2},
      {"Sigma1", s.Sigma1},   {"G1", s.G1},
      {"G2", s.G2},       {"G3", s.G3},
      {"R1", s.R1},       {"R2", s.R2},
      {"R3", s.R3},       {"R4", s.R4},
      {"R5", s.R5},       {"R6", s.R6},
      {"R7", s.R7},       {"R8", s.R8},
      {"R9", s.R9},       {"R10", s.R10},
      {"R1_3", s.R1_3},   {"R2_3", s.R2_3},
      {"M_Theta", in.M_theta},
      {"p1_bar", dnn.p1_bar},
      {"p1_lower", 2.0 * dnn.p1_star - dnn.p1_bar},
  };
  const std::string tag = "assemble_theorem1";
  for (const auto& [name, _] : prog.symbols) prog.symbol_builders[name] = tag;
  for (const char* sym :
       {"G", "Q", "amalg1", "amalg2", "Tcal1", "Tcal2", "M_DNN", "P", "T1",
        "T2", "Xi1", "Xi2", "R", "N1", "N2", "gamma", "LMI_main",
        "LMI_inclusion"})
    prog.symbol_builders[sym] = tag;
  return prog;
}

}  // namespace ancert
