// Affine LMI representation, zeta-space selectors, DNN relaxation bundle,
// and the Theorem-1 (event-triggered) / Theorem-2 (self-triggered) block-LMI
// assemblers.
#pragma once

#include <utility>

#include "ancert/dnn.hpp"
#include "ancert/plant.hpp"

namespace ancert {

enum class VarKind { SymPsd, Free, NonnegVector, NonnegScalar };

struct VarSpec {
  std::string name;
  int rows = 0, cols = 0;
  VarKind kind = VarKind::Free;
  // Number of scalar decision entries under the vectorization convention:
  // symmetric by upper triangle row-major, free row-major.
  int entries() const;
};

int var_entries(const VarSpec& v);
Vec mat_to_vec(const VarSpec& v, const Mat& value);
Mat vec_to_mat(const VarSpec& v, const Vec& x);

enum class Sense { NegDef, Psd };

// constant + sum_var sum_k x_k * terms[var][k], with the entry order of
// mat_to_vec. NegDef means "must be negative definite (<= -margin I)";
// Psd means ">= 0".
struct AffineLmi {
  std::string name;
  int size = 0;
  Sense sense = Sense::NegDef;
  Mat constant;
  std::map<std::string, std::vector<Mat>> terms;

  Mat evaluate(const Assignment& a) const;
  std::vector<Mat>& term_slot(const VarSpec& v);
};

// Block row selector: identity rows picking segment `index` (1-based) out of
// Col(segments with the given dims).
Mat selector(const std::vector<int>& dims, int index);

// Term builders (all accumulate into lmi.terms):
//   += factor * K^T X K                 (X symmetric)
void add_sym_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& K,
                       double factor = 1.0);
//   += factor * Sym(A^T X B)            (X free)
void add_free_sym_product(AffineLmi& lmi, const VarSpec& v, const Mat& A,
                          const Mat& B, double factor = 1.0);
//   += factor * (U^T diag(g) V + V^T diag(g) U)   (g nonneg vector)
void add_gamma_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& U,
                         const Mat& V, double factor = 1.0);
//   += factor * lambda * K^T K          (lambda nonneg scalar)
void add_scalar_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& K,
                          double factor = 1.0);

// DNN relaxation bundle consumed by the assemblers: isolation maps, stacked
// local sectors from the seeded pre-activation boxes, and the first-layer
// box for the inclusion LMIs.
struct DnnRelaxation {
  IsolationMaps iso;
  Vec rho, sigma;       // stacked sectors, length a
  Vec p1_star, p1_bar;  // first-layer box center / upper bound, length a_1
  Mat W1;
  int n = 0, m = 0, a = 0, a1 = 0;
};
DnnRelaxation relax_dnn(const Dnn& net, const Vec& x_star, const Vec& delta1);

// Extra ellipsoid-inclusion rows |row (x - x*)| <= bound, appended by the
// synthesis layer (e.g. uncertainty sector validity region).
using StateRow = std::pair<RowVec, double>;

struct TheoremProgram {
  std::vector<VarSpec> vars;
  std::vector<AffineLmi> lmis;
  // Printed-symbol registry: symbol name -> constant matrix (when the symbol
  // is a constant) and symbol name -> builder tag for every printed symbol.
  std::map<std::string, Mat> symbols;
  std::map<std::string, std::string> symbol_builders;
  int n = 0, z = 0, a = 0, w = 0, dim_zeta = 0;
  const VarSpec& var(const std::string& name) const;
};

struct Theorem1Input {
  AugmentedSystem sys;
  DnnRelaxation dnn;
  Mat M_theta;
  double eps1 = 0.003, eps2 = 0.002;
  int theta_l = 1, theta_u = 5;
  std::vector<StateRow> state_rows;
};
TheoremProgram assemble_theorem1(const Theorem1Input& in);

struct Theorem2Input {
  AugmentedSystem sys;
  DnnRelaxation dnn;
  Mat M_theta;
  double e1 = 0.8, e2 = 0.6;
  int s_bar = 10;
  std::vector<StateRow> state_rows;
};
TheoremProgram assemble_theorem2(const Theorem2Input& in);

// Diagnostics.
struct LmiReport {
  std::string name;
  double min_eig = 0.0, max_eig = 0.0;
  bool ok = false;
};
std::vector<LmiReport> feasibility_oracle(const std::vector<AffineLmi>& lmis,
                                          const Assignment& a,
                                          double tol = 1e-9);

// Cross-check of a block LMI [[A, B], [B^T, C]] < 0 against its Schur
// complement: C < 0 and A - B C^{-1} B^T < 0. tail = rows of C.
struct SchurCheck {
  bool direct = false;
  bool via_schur = false;
  bool agree() const { return direct == via_schur; }
};
SchurCheck schur_check(const Mat& block, int tail);

}  // namespace ancert
