#include "ancert/sdp.hpp"

#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ancert {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal:
      return "optimal";
    case SdpStatus::Infeasible:
      return "infeasible";
    case SdpStatus::MaxIter:
      return "max_iterations";
    case SdpStatus::Inaccurate:
      return "inaccurate";
  }
  return "unknown";
}

namespace {

struct Block {
  int d = 0;
  Mat F0;
  // (global entry index, symmetric coefficient)
  std::vector<std::pair<int, Mat>> F;
};

struct Flattened {
  std::vector<Block> blocks;
  std::vector<int> offsets;  // per var
  int m = 0;
};

// Symmetric basis matrix for entry k of a SymPsd variable.
Mat sym_basis(int r, int k) {
  Mat e = Mat::Zero(r, r);
  int idx = 0;
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j) {
      if (idx == k) {
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        return e;
      }
      ++idx;
    }
  throw std::logic_error("sym_basis: index out of range");
}

Flattened flatten(const std::vector<VarSpec>& vars,
                  const std::vector<AffineLmi>& lmis, double margin) {
  Flattened f;
  f.offsets.resize(vars.size());
  for (size_t v = 0; v < vars.size(); ++v) {
    f.offsets[v] = f.m;
    f.m += var_entries(vars[v]);
  }
  auto offset_of = [&](const std::string& name) {
    for (size_t v = 0; v < vars.size(); ++v)
      if (vars[v].name == name) return std::make_pair(f.offsets[v], &vars[v]);
    throw std::invalid_argument("sdp: LMI references unknown variable " + name);
  };

  for (const auto& lmi : lmis) {
    Block b;
    b.d = lmi.size;
    const double sign = lmi.sense == Sense::NegDef ? -1.0 : 1.0;
    b.F0 = sign * lmi.constant;
    if (lmi.sense == Sense::NegDef)
      b.F0 -= margin * Mat::Identity(b.d, b.d);
    for (const auto& [name, coeffs] : lmi.terms) {
      auto [off, spec] = offset_of(name);
      if (static_cast<int>(coeffs.size()) != var_entries(*spec))
        throw std::invalid_argument("sdp: term entry count mismatch for " +
                                    name);
      for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k].cwiseAbs().maxCoeff() == 0.0) continue;
        b.F.emplace_back(off + static_cast<int>(k), sign * coeffs[k]);
      }
    }
    f.blocks.push_back(std::move(b));
  }

  // Variable cone blocks.
  for (size_t v = 0; v < vars.size(); ++v) {
    const VarSpec& spec = vars[v];
    const int off = f.offsets[v];
    switch (spec.kind) {
      case VarKind::SymPsd: {
        Block b;
        b.d = spec.rows;
        b.F0 = -margin * Mat::Identity(b.d, b.d);
        for (int k = 0; k < var_entries(spec); ++k)
          b.F.emplace_back(off + k, sym_basis(spec.rows, k));
        f.blocks.push_back(std::move(b));
        break;
      }
      case VarKind::NonnegVector:
        for (int k = 0; k < spec.rows; ++k) {
          Block b;
          b.d = 1;
          b.F0 = Mat::Zero(1, 1);
          b.F.emplace_back(off + k, Mat::Identity(1, 1));
          f.blocks.push_back(std::move(b));
        }
        break;
      case VarKind::NonnegScalar: {
        Block b;
        b.d = 1;
        b.F0 = Mat::Constant(1, 1, -margin);
        b.F.emplace_back(off, Mat::Identity(1, 1));
        f.blocks.push_back(std::move(b));
        break;
      }
      case VarKind::Free:
        break;
    }
  }
  return f;
}

Mat eval_block(const Block& b, const Vec& x) {
  Mat s = b.F0;
  for (const auto& [idx, F] : b.F) s += x[idx] * F;
  return s;
}

// Largest step alpha in [0, 1] keeping S + alpha dS > 0, with a 0.98
// fraction-to-boundary backoff.
double max_step(const Mat& S, const Mat& dS) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat L = llt.matrixL();
  Mat G = L.triangularView<Eigen::Lower>().solve(dS);
  G = L.triangularView<Eigen::Lower>().solve(G.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()),
                                        Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, 0.98 / (-lmin));
}

struct IpmOut {
  Vec x;
  bool converged = false;
  bool stalled = false;
  int iters = 0;
  double gap = 0.0, rd_norm = 0.0, obj = 0.0;
};

// Core NT-scaled path-following method. x0 must be strictly feasible for all
// blocks. If early_stop_below is finite, returns as soon as c^T x drops
// below it (used by the feasibility phase).
IpmOut ipm(const std::vector<Block>& blocks, const Vec& c, Vec x,
           const SdpOptions& opts,
           double early_stop_below = -std::numeric_limits<double>::infinity()) {
  const int m = static_cast<int>(x.size());
  const int nb = static_cast<int>(blocks.size());
  double total_dim = 0.0;
  for (const auto& b : blocks) total_dim += b.d;

  std::vector<Mat> Z(nb), S(nb);
  for (int b = 0; b < nb; ++b) Z[b] = Mat::Identity(blocks[b].d, blocks[b].d);

  IpmOut out;
  out.x = x;
  const double cnorm = 1.0 + c.cwiseAbs().maxCoeff();
  int stall_count = 0;

  for (int it = 0; it < opts.max_iter; ++it) {
    out.iters = it;
    // Current slabs and residuals.
    double gap = 0.0;
    Vec atz = Vec::Zero(m);   // A*(Z)_i = sum_b tr(F_i Z_b)
    Vec asinv = Vec::Zero(m); // sum_b tr(F_i S_b^{-1})
    std::vector<Mat> Sinv(nb), Winv(nb);
    bool ok = true;
    for (int b = 0; b < nb; ++b) {
      S[b] = eval_block(blocks[b], x);
      Eigen::LLT<Mat> llt(S[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Mat L = llt.matrixL();
      Mat Id = Mat::Identity(blocks[b].d, blocks[b].d);
      Mat Linv = L.triangularView<Eigen::Lower>().solve(Id);
      Sinv[b] = Linv.transpose() * Linv;
      // NT scaling: W = L (L^T Z L)^{-1/2} L^T, so
      // W^{-1} = L^{-T} (L^T Z L)^{1/2} L^{-1}.
      Mat Azl = L.transpose() * Z[b] * L;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Azl + Azl.transpose()));
      Mat half = es.eigenvectors() *
                 es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().asDiagonal() *
                 es.eigenvectors().transpose();
      Winv[b] = Linv.transpose() * half * Linv;
      gap += (S[b].array() * Z[b].array()).sum();
      for (const auto& [idx, F] : blocks[b].F) {
        atz[idx] += (F.array() * Z[b].array()).sum();
        asinv[idx] += (F.array() * Sinv[b].array()).sum();
      }
    }
    if (!ok) {
      out.stalled = true;
      return out;
    }
    const double mu = gap / total_dim;
    const double obj = c.dot(x);
    const Vec rd = c - atz;
    out.x = x;
    out.gap = gap;
    out.rd_norm = rd.cwiseAbs().maxCoeff();
    out.obj = obj;
    if (obj < early_stop_below) {
      out.converged = true;
      return out;
    }
    if (gap / (1.0 + std::abs(obj)) < opts.tol &&
        out.rd_norm / cnorm < opts.tol) {
      out.converged = true;
      return out;
    }

    // Schur complement M_ij = sum_b tr(F_i W^{-1} F_j W^{-1}).
    Mat M = Mat::Zero(m, m);
    for (int b = 0; b < nb; ++b) {
      const auto& Fs = blocks[b].F;
      const int nf = static_cast<int>(Fs.size());
      std::vector<Mat> H(nf);
      for (int i = 0; i < nf; ++i) H[i] = Winv[b] * Fs[i].second * Winv[b];
      for (int i = 0; i < nf; ++i)
        for (int j = 0; j <= i; ++j) {
          const double v = (H[i].array() * Fs[j].second.array()).sum();
          M(Fs[i].first, Fs[j].first) += v;
          if (Fs[i].first != Fs[j].first) M(Fs[j].first, Fs[i].first) += v;
        }
    }
    // Regularized solve: the Schur matrix is structurally near-singular (free
    // entries whose coefficient slabs are linearly dependent), so a plain
    // factorization produces huge junk steps along the quotient directions.
    // Tikhonov damping caps those components and iterative refinement
    // restores accuracy on the well-conditioned subspace.
    const double mreg =
        std::max(M.diagonal().cwiseAbs().maxCoeff(), 1.0) *
        std::clamp(mu * 1e-6, 1e-9, 1e-8);
    Eigen::LDLT<Mat> mldlt(Mat(M + mreg * Mat::Identity(m, m)));
    auto msolve = [&](const Vec& rhs) -> Vec {
      Vec dx = mldlt.solve(rhs);
      const double rn = rhs.norm();
      for (int t = 0; t < 20; ++t) {
        Vec res = rhs - M * dx;
        if (res.norm() <= 1e-13 * rn) break;
        dx += mldlt.solve(res);
      }
      return dx;
    };

    auto direction = [&](double sigma_mu, const std::vector<Mat>* corr,
                         Vec& dx, std::vector<Mat>& dZ, double& ap,
                         double& ad) {
      Vec rhs = sigma_mu * asinv - c;
      if (corr)
        for (int b = 0; b < nb; ++b)
          for (const auto& [idx, F] : blocks[b].F)
            rhs[idx] -= (F.array() * (*corr)[b].array()).sum();
      dx = msolve(rhs);
      dZ.resize(nb);
      ap = 1.0;
      ad = 1.0;
      for (int b = 0; b < nb; ++b) {
        Mat dS = Mat::Zero(blocks[b].d, blocks[b].d);
        for (const auto& [idx, F] : blocks[b].F) dS += dx[idx] * F;
        dZ[b] = sigma_mu * Sinv[b] - Z[b] - Winv[b] * dS * Winv[b];
        if (corr) dZ[b] -= (*corr)[b];
        dZ[b] = 0.5 * (dZ[b] + dZ[b].transpose());
        ap = std::min(ap, max_step(S[b], dS));
        ad = std::min(ad, max_step(Z[b], dZ[b]));
      }
    };

    // Predictor (sigma = 0) to set the centering weight and the Mehrotra
    // second-order correction, then corrector.
    Vec dx;
    std::vector<Mat> dZ;
    double ap, ad;
    direction(0.0, nullptr, dx, dZ, ap, ad);
    double gap_aff = 0.0;
    std::vector<Mat> corr(nb);
    for (int b = 0; b < nb; ++b) {
      Mat dS = Mat::Zero(blocks[b].d, blocks[b].d);
      for (const auto& [idx, F] : blocks[b].F) dS += dx[idx] * F;
      gap_aff +=
          ((S[b] + ap * dS).array() * (Z[b] + ad * dZ[b]).array()).sum();
      // Linearization error of the complementarity equation along the affine
      // direction, symmetrized: sym(S^{-1} dS_aff dZ_aff).
      Mat E = Sinv[b] * dS * dZ[b];
      corr[b] = 0.5 * (E + E.transpose());
    }
    double sigma = std::pow(std::max(gap_aff, 0.0) / gap, 3.0);
    sigma = std::min(0.5, std::max(1e-6, sigma));
    direction(sigma * mu, &corr, dx, dZ, ap, ad);

    if (opts.verbose)
      std::printf(
          "it %3d obj %+.6e gap %.3e rd %.3e sigma %.2e ap %.2e ad %.2e\n",
          it, obj, gap, out.rd_norm, sigma, ap, ad);
    // Verified fraction-to-boundary: back off until both iterates factor.
    auto primal_pd = [&](double a) {
      for (int b = 0; b < nb; ++b)
        if (Eigen::LLT<Mat>(eval_block(blocks[b], x + a * dx)).info() !=
            Eigen::Success)
          return false;
      return true;
    };
    auto dual_pd = [&](double a) {
      for (int b = 0; b < nb; ++b)
        if (Eigen::LLT<Mat>(Mat(Z[b] + a * dZ[b])).info() != Eigen::Success)
          return false;
      return true;
    };
    for (int t = 0; t < 60 && ap > 1e-12 && !primal_pd(ap); ++t) ap *= 0.8;
    for (int t = 0; t < 60 && ad > 1e-12 && !dual_pd(ad); ++t) ad *= 0.8;
    // A common step keeps the duality gap contraction 1 - alpha(1 - sigma)
    // intact; wildly unequal partial steps can grow the gap.
    ap = ad = std::min(ap, ad);

    if (ap < 1e-8 && ad < 1e-8) {
      if (++stall_count >= 3) {
        out.stalled = true;
        return out;
      }
    } else {
      stall_count = 0;
    }
    x += ap * dx;
    for (int b = 0; b < nb; ++b) Z[b] += ad * dZ[b];
  }
  out.x = x;
  return out;
}

}  // namespace

Vec objective_vector(const std::vector<VarSpec>& vars,
                     const SdpObjective& obj) {
  int m = 0;
  std::vector<int> offsets;
  for (const auto& v : vars) {
    offsets.push_back(m);
    m += var_entries(v);
  }
  Vec c = Vec::Zero(m);
  for (const auto& [name, C] : obj.coeffs) {
    bool found = false;
    for (size_t v = 0; v < vars.size(); ++v) {
      if (vars[v].name != name) continue;
      found = true;
      const VarSpec& spec = vars[v];
      int k = offsets[v];
      switch (spec.kind) {
        case VarKind::SymPsd:
          // tr(C^T X) with X symmetric: entry (i,j), i<j carries both C_ij
          // and C_ji.
          for (int i = 0; i < spec.rows; ++i)
            for (int j = i; j < spec.rows; ++j)
              c[k++] = i == j ? C(i, i) : C(i, j) + C(j, i);
          break;
        case VarKind::Free:
          for (int i = 0; i < spec.rows; ++i)
            for (int j = 0; j < spec.cols; ++j) c[k++] = C(i, j);
          break;
        case VarKind::NonnegVector:
          for (int i = 0; i < spec.rows; ++i) c[k++] = C(i, 0);
          break;
        case VarKind::NonnegScalar:
          c[k] = C(0, 0);
          break;
      }
    }
    if (!found)
      throw std::invalid_argument("sdp objective: unknown variable " + name);
  }
  return c;
}

SdpResult solve_sdp(const std::vector<VarSpec>& vars,
                    const std::vector<AffineLmi>& lmis, const SdpObjective& obj,
                    const SdpOptions& opts) {
  Flattened f = flatten(vars, lmis, opts.lmi_margin);
  Vec c = objective_vector(vars, obj);

  // Column equilibration: substitute x_i = xt_i / d_i with d_i the largest
  // coefficient magnitude of entry i, so all scaled coefficients are O(1).
  Vec d = Vec::Ones(f.m);
  for (const auto& b : f.blocks)
    for (const auto& [idx, F] : b.F)
      d[idx] = std::max(d[idx], F.cwiseAbs().maxCoeff());
  for (auto& b : f.blocks)
    for (auto& [idx, F] : b.F) F /= d[idx];
  c = c.cwiseQuotient(d);

  // Starting point (warm start if provided, else zeros), in scaled entries.
  Vec x0 = Vec::Zero(f.m);
  for (size_t v = 0; v < vars.size(); ++v) {
    auto it = opts.warm_start.find(vars[v].name);
    if (it == opts.warm_start.end()) continue;
    Vec xv = mat_to_vec(vars[v], it->second);
    x0.segment(f.offsets[v], xv.size()) =
        xv.cwiseProduct(d.segment(f.offsets[v], xv.size()));
  }

  SdpResult result;

  // Phase 1: min tau s.t. S_b(x) + tau I >= 0.
  double tau0 = 1.0;
  for (const auto& b : f.blocks)
    tau0 = std::max(tau0, 1.0 - min_eig(eval_block(b, x0)));
  std::vector<Block> aug = f.blocks;
  for (auto& b : aug) b.F.emplace_back(f.m, Mat::Identity(b.d, b.d));
  Vec caug = Vec::Zero(f.m + 1);
  caug[f.m] = 1.0;
  Vec xaug(f.m + 1);
  xaug << x0, tau0;
  SdpOptions p1opts = opts;
  p1opts.tol = std::max(opts.tol, 1e-9);
  IpmOut ph1 = ipm(aug, caug, xaug, p1opts, opts.phase1_target);
  result.iterations = ph1.iters;
  result.phase1_tau = ph1.x[f.m];
  if (ph1.x[f.m] >= 0.0) {
    // tau* > 0 at phase-1 optimality certifies infeasibility; a non-converged
    // phase 1 proves nothing either way.
    result.status = ph1.converged ? SdpStatus::Infeasible : SdpStatus::MaxIter;
    // Still report the best point found (unscaled).
    const Vec xr = ph1.x.head(f.m).cwiseQuotient(d);
    for (size_t v = 0; v < vars.size(); ++v)
      result.assignment[vars[v].name] = vec_to_mat(
          vars[v], xr.segment(f.offsets[v], var_entries(vars[v])));
    return result;
  }
  Vec x = ph1.x.head(f.m);

  // Phase 2 (skipped for pure feasibility problems).
  IpmOut ph2;
  if (c.cwiseAbs().maxCoeff() > 0.0) {
    ph2 = ipm(f.blocks, c, x, opts);
    result.iterations += ph2.iters;
    x = ph2.x;
    result.gap = ph2.gap;
    result.dual_residual = ph2.rd_norm;
    // Near-degenerate duals plateau just short of the tight tolerance; a
    // point with small gap and small dual residual is still a usable
    // certificate (callers re-validate primal feasibility directly).
    const double cn = 1.0 + c.cwiseAbs().maxCoeff();
    result.status = ph2.converged
                        ? SdpStatus::Optimal
                        : (ph2.gap / (1.0 + std::abs(ph2.obj)) < 1e-3 &&
                                   ph2.rd_norm / cn < 1e-4
                               ? SdpStatus::Inaccurate
                               : SdpStatus::MaxIter);
  } else {
    result.status = SdpStatus::Optimal;
  }

  result.objective = c.dot(x);
  const Vec xr = x.cwiseQuotient(d);
  for (size_t v = 0; v < vars.size(); ++v)
    result.assignment[vars[v].name] =
        vec_to_mat(vars[v], xr.segment(f.offsets[v], var_entries(vars[v])));
  return result;
}

}  // namespace ancert
