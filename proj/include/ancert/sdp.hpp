// Embedded primal-dual interior-point solver for block-diagonal SDPs in
// inequality form: min c^T x s.t. F0_b + sum_i x_i F_{b,i} >= 0 per block,
// built from named AffineLmi constraints plus variable cone blocks.
#pragma once

#include "ancert/lmi.hpp"

namespace ancert {

struct SdpOptions {
  double tol = 1e-8;
  int max_iter = 400;
  // Slack applied to NegDef constraints (<= -margin I) and to SymPsd /
  // NonnegScalar variable cones (>= margin I).
  double lmi_margin = 1e-8;
  // Phase-1 early stop: accept as strictly feasible once tau <= this.
  double phase1_target = -1e-2;
  bool verbose = false;
  Assignment warm_start;
};

enum class SdpStatus { Optimal, Infeasible, MaxIter, Inaccurate };
std::string to_string(SdpStatus s);

// Minimize sum_v tr(coeffs[v]^T X_v).
struct SdpObjective {
  std::map<std::string, Mat> coeffs;
};

struct SdpResult {
  SdpStatus status = SdpStatus::MaxIter;
  Assignment assignment;
  double objective = 0.0;
  int iterations = 0;      // total over both phases
  double gap = 0.0;        // final complementarity sum tr(S Z)
  double dual_residual = 0.0;
  double phase1_tau = 0.0;  // optimal/accepted feasibility slack
};

SdpResult solve_sdp(const std::vector<VarSpec>& vars,
                    const std::vector<AffineLmi>& lmis, const SdpObjective& obj,
                    const SdpOptions& opts = {});

// Objective vectorization shared with the interchange format.
Vec objective_vector(const std::vector<VarSpec>& vars, const SdpObjective& obj);

}  // namespace ancert
