// Self-triggered certification LMIs (Theorem 2): zetabar(k) = Col(eta, m,
// omega, x_kq, x_kq+1, avg1, avg2), single block LMI [[Gtilde, eth1],
// [*, -eth2]] < 0 plus the first-layer inclusion LMIs with the symmetric
// pre-activation box.
#include <stdexcept>

#include "ancert/lmi.hpp"

namespace ancert {

namespace {

struct Thm2Symbols {
  int n, z, a, w, ntil;
  Mat L1, L2, L3, L4, L5, L6, L7;
  Mat Lambda1, Lambda2, Sigma1;
  Mat Knext;
  Mat G1, G2, G3;
  Mat R1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R11, R12, R13;
};

Mat col2(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}
Mat col4(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
  return col2(col2(a, b), col2(c, d));
}

Thm2Symbols build_symbols(const AugmentedSystem& sys,
                          const DnnRelaxation& dnn) {
  Thm2Symbols s;
  s.n = sys.n;
  s.z = sys.z();
  s.a = dnn.a;
  s.w = sys.w;
  const int n = s.n;
  const std::vector<int> dims{s.z, s.a, s.w, n, n, n, n};
  s.ntil = s.z + s.a + s.w + 4 * n;

  s.L1 = selector(dims, 1);
  s.L2 = selector(dims, 2);
  s.L3 = selector(dims, 3);
  s.L4 = selector(dims, 4);  // x(k_q) - x*
  s.L5 = selector(dims, 5);  // x(k_{q+1}) - x*
  s.L6 = selector(dims, 6);
  s.L7 = selector(dims, 7);

  s.Lambda2 = Mat::Zero(n, s.z);
  s.Lambda2.leftCols(n).setIdentity();

  s.Sigma1 = Mat::Zero(sys.m + s.w, n + s.a + s.w);
  s.Sigma1.block(0, 0, sys.m, n) = dnn.iso.Pi_ux;
  s.Sigma1.block(0, n, sys.m, s.a) = dnn.iso.Pi_um;
  s.Sigma1.block(sys.m, n + s.a, s.w, s.w).setIdentity();

  s.Lambda1 = col2(col2(s.L4, s.L2), s.L3);

  s.Knext = sys.A * s.L1 + sys.B * s.Sigma1 * s.Lambda1;
  const Mat xk = s.Lambda2 * s.L1;
  const Mat xnext = s.Lambda2 * s.Knext;

  s.G1 = xnext - xk;
  s.G2 = sys.C * s.L1 + sys.D * s.Sigma1 * s.Lambda1;
  s.G3 = col2(dnn.iso.Pi_px * s.L4 + dnn.iso.Pi_pm * s.L2, s.L2);

  const Mat Z = Mat::Zero(n, s.ntil);
  s.R12 = xnext;
  s.R13 = s.L5 - xnext;
  s.R1 = col4(s.L4, s.L5, s.R12, s.L6 + s.R12);
  s.R2 = col4(-s.L4, -s.L5, s.R13, s.L7 - s.L5 - xk);
  // Rbar3/Rbar4 are the printed Upsilonbar3/Upsilonbar4.
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
  s.R11 = col2(s.L5, s.L4);
  return s;
}

}  // namespace

TheoremProgram assemble_theorem2(const Theorem2Input& in) {
  const AugmentedSystem& sys = in.sys;
  const DnnRelaxation& dnn = in.dnn;
  if (dnn.n != sys.n)
    throw std::invalid_argument("theorem2: dnn input dim != plant states");
  if (dnn.m != sys.m)
    throw std::invalid_argument("theorem2: dnn output dim != plant inputs");
  if (in.s_bar < 1) throw std::invalid_argument("theorem2: s_bar >= 1");
  if (in.M_theta.rows() != sys.kappa || in.M_theta.cols() != sys.kappa)
    throw std::invalid_argument("theorem2: M_theta must be kappa x kappa");

  Thm2Symbols s = build_symbols(sys, dnn);
  const int n = s.n, ntil = s.ntil;
  const double sb = static_cast<double>(in.s_bar);

  TheoremProgram prog;
  prog.n = n;
  prog.z = s.z;
  prog.a = s.a;
  prog.w = s.w;
  prog.dim_zeta = ntil;
  prog.vars = {
      {"P", s.z, s.z, VarKind::SymPsd},
      {"T1", n, n, VarKind::SymPsd},
      {"T2", n, n, VarKind::SymPsd},
      {"Xi1", n, n, VarKind::SymPsd},
      {"Xi2", n, n, VarKind::SymPsd},
      {"R", 4 * n, 4 * n, VarKind::Free},
      {"N1", ntil, 2 * n, VarKind::Free},
      {"N2", ntil, 2 * n, VarKind::Free},
      {"gamma", s.a, 1, VarKind::NonnegVector},
      {"lambda1", 1, 1, VarKind::NonnegScalar},
      {"lambda2", 1, 1, VarKind::NonnegScalar},
  };
  const VarSpec &vP = prog.vars[0], &vT1 = prog.vars[1], &vT2 = prog.vars[2],
                &vXi1 = prog.vars[3], &vXi2 = prog.vars[4], &vR = prog.vars[5],
                &vN1 = prog.vars[6], &vN2 = prog.vars[7],
                &vGamma = prog.vars[8], &vL1 = prog.vars[9],
                &vL2 = prog.vars[10];

  const int d = ntil + 12 * n;
  Mat Ext = Mat::Zero(ntil, d);
  Ext.leftCols(ntil).setIdentity();
  Mat Tail = Mat::Zero(12 * n, d);
  Tail.rightCols(12 * n).setIdentity();
  const Mat TailB1 = Tail.middleRows(0, 2 * n);
  const Mat TailB2 = Tail.middleRows(2 * n, 2 * n);
  const Mat TailB3 = Tail.middleRows(4 * n, 4 * n);
  const Mat TailB4 = Tail.middleRows(8 * n, 4 * n);

  const Mat L1e = s.L1 * Ext, L4e = s.L4 * Ext, L5e = s.L5 * Ext;
  const Mat Knexte = s.Knext * Ext;
  const Mat G1e = s.G1 * Ext, G2e = s.G2 * Ext, G3e = s.G3 * Ext;
  const Mat R1e = s.R1 * Ext, R2e = s.R2 * Ext, R3e = s.R3 * Ext,
            R4e = s.R4 * Ext, R5e = s.R5 * Ext, R6e = s.R6 * Ext,
            R7e = s.R7 * Ext, R8e = s.R8 * Ext, R9e = s.R9 * Ext,
            R10e = s.R10 * Ext;
  const Mat P_half = G3e.topRows(s.a);
  const Mat M_half = G3e.bottomRows(s.a);
  const Mat U_half = Mat(dnn.sigma.asDiagonal()) * P_half - M_half;
  const Mat V_half = M_half - Mat(dnn.rho.asDiagonal()) * P_half;

  AffineLmi lmi;
  lmi.name = "thm2_main";
  lmi.size = d;
  lmi.sense = Sense::NegDef;
  lmi.constant = G2e.transpose() * in.M_theta * G2e;

  add_sym_quadratic(lmi, vP, Knexte, 1.0);
  add_sym_quadratic(lmi, vP, L1e, -1.0);
  add_sym_quadratic(lmi, vT1, G1e, sb - 1.0);
  add_sym_quadratic(lmi, vT2, G1e, sb + 1.0);
  add_scalar_quadratic(lmi, vL1, R7e, sb);
  add_scalar_quadratic(lmi, vL2, R4e, sb);
  add_gamma_quadratic(lmi, vGamma, U_half, V_half, 1.0);
  add_free_sym_product(lmi, vR, R1e, R2e, 1.0);
  add_free_sym_product(lmi, vR, R5e, R6e, -1.0);
  add_free_sym_product(lmi, vN1, Ext, R9e, 1.0);
  add_free_sym_product(lmi, vN2, Ext, R10e, 1.0);
  // -Rbar11^T Xitilde Rbar11 expanded over the Xi variables:
  // -e1 ||x_pred||^2_Xi1 - e2 ||x_kq||^2_Xi1 + ||x_pred - x_kq||^2_Xi2.
  add_sym_quadratic(lmi, vXi1, L5e, -in.e1);
  add_sym_quadratic(lmi, vXi1, L4e, -in.e2);
  add_sym_quadratic(lmi, vXi2, L5e - L4e, 1.0);

  // eth1 off-diagonal row and -eth2 diagonal corner.
  add_free_sym_product(lmi, vN1, Ext, TailB1, sb);
  add_free_sym_product(lmi, vN2, Ext, TailB2, sb);
  add_free_sym_product(lmi, vR, R3e, TailB3, sb);
  add_free_sym_product(lmi, vR, R8e, TailB4, sb);
  add_sym_quadratic(lmi, vT1, TailB1.topRows(n), -sb);
  add_sym_quadratic(lmi, vT1, TailB1.bottomRows(n), -3.0 * sb);
  add_sym_quadratic(lmi, vT2, TailB2.topRows(n), -sb);
  add_sym_quadratic(lmi, vT2, TailB2.bottomRows(n), -3.0 * sb);
  add_scalar_quadratic(lmi, vL1, TailB3, -sb);
  add_scalar_quadratic(lmi, vL2, TailB4, -sb);

  prog.lmis.push_back(std::move(lmi));

  auto add_inclusion = [&](const std::string& name, const RowVec& row_x,
                           double bound) {
    AffineLmi inc;
    inc.name = name;
    inc.size = 1 + s.z;
    inc.sense = Sense::Psd;
    inc.constant = Mat::Zero(inc.size, inc.size);
    inc.constant(0, 0) = bound * bound;
    RowVec row_ext = RowVec::Zero(s.z);
    row_ext.head(n) = row_x;
    inc.constant.block(0, 1, 1, s.z) = row_ext;
    inc.constant.block(1, 0, s.z, 1) = row_ext.transpose();
    Mat K = Mat::Zero(s.z, inc.size);
    K.rightCols(s.z).setIdentity();
    add_sym_quadratic(inc, vP, K, 1.0);
    prog.lmis.push_back(std::move(inc));
  };
  for (int j = 0; j < dnn.a1; ++j)
    add_inclusion("thm2_inclusion_p1_row" + std::to_string(j + 1),
                  dnn.W1.row(j), dnn.p1_bar[j] - dnn.p1_star[j]);
  for (size_t i = 0; i < in.state_rows.size(); ++i)
    add_inclusion("thm2_inclusion_state_row" + std::to_string(i + 1),
                  in.state_rows[i].first, in.state_rows[i].second);

  prog.symbols = {
      {"Lbar1", s.L1},   {"Lbar2", s.L2},   {"Lbar3", s.L3},
      {"Lbar4", s.L4},   {"Lbar5", s.L5},   {"Lbar6", s.L6},
      {"Lbar7", s.L7},   {"Lambdabar1", s.Lambda1}, {"Lambda2", s.Lambda2},
      {"Sigma1", s.Sigma1}, {"Gbar1", s.G1}, {"Gbar2", s.G2},
      {"Gbar3", s.G3},   {"Rbar1", s.R1},   {"Rbar2", s.R2},
      {"Rbar3", s.R3},   {"Rbar4", s.R4},   {"Rbar5", s.R5},
      {"Rbar6", s.R6},   {"Rbar7", s.R7},   {"Rbar8", s.R8},
      {"Rbar9", s.R9},   {"Rbar10", s.R10}, {"Rbar11", s.R11},
      {"Rbar12", s.R12}, {"Rbar13", s.R13},
      // Upsilonbar3/4 are printed but only used through Rbar3/Rbar4.
      {"Upsilonbar3", s.R3}, {"Upsilonbar4", s.R4},
      {"M_Theta", in.M_theta},
      {"p1_bar", dnn.p1_bar},
      {"p1_lower", -dnn.p1_bar},
  };
  const std::string tag = "assemble_theorem2";
  for (const auto& [name, _] : prog.symbols) prog.symbol_builders[name] = tag;
  for (const char* sym :
       {"Gtilde", "eth1", "eth2", "Tcal1", "Tcal2", "Xitilde", "X1", "X2",
        "M_DNN", "P", "T1", "T2", "Xi1", "Xi2", "R", "N1", "N2", "gamma",
        "lambda1", "lambda2", "LMI_main", "LMI_inclusion"})
    prog.symbol_builders[sym] = tag;
  return prog;
}

}  // namespace ancert
