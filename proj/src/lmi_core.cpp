#include "ancert/lmi.hpp"

#include <stdexcept>

namespace ancert {

int var_entries(const VarSpec& v) {
  switch (v.kind) {
    case VarKind::SymPsd:
      return v.rows * (v.rows + 1) / 2;
    case VarKind::Free:
      return v.rows * v.cols;
    case VarKind::NonnegVector:
      return v.rows;
    case VarKind::NonnegScalar:
      return 1;
  }
  return 0;
}

int VarSpec::entries() const { return var_entries(*this); }

Vec mat_to_vec(const VarSpec& v, const Mat& value) {
  Vec x(var_entries(v));
  switch (v.kind) {
    case VarKind::SymPsd: {
      if (value.rows() != v.rows || value.cols() != v.rows)
        throw std::invalid_argument("mat_to_vec: bad symmetric shape " +
                                    v.name);
      int k = 0;
      for (int i = 0; i < v.rows; ++i)
        for (int j = i; j < v.rows; ++j) x[k++] = value(i, j);
      break;
    }
    case VarKind::Free: {
      if (value.rows() != v.rows || value.cols() != v.cols)
        throw std::invalid_argument("mat_to_vec: bad free shape " + v.name);
      int k = 0;
      for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) x[k++] = value(i, j);
      break;
    }
    case VarKind::NonnegVector:
      if (value.rows() != v.rows || value.cols() != 1)
        throw std::invalid_argument("mat_to_vec: bad vector shape " + v.name);
      x = value.col(0);
      break;
    case VarKind::NonnegScalar:
      if (value.size() != 1)
        throw std::invalid_argument("mat_to_vec: bad scalar shape " + v.name);
      x[0] = value(0, 0);
      break;
  }
  return x;
}

Mat vec_to_mat(const VarSpec& v, const Vec& x) {
  if (x.size() != var_entries(v))
    throw std::invalid_argument("vec_to_mat: bad entry count for " + v.name);
  switch (v.kind) {
    case VarKind::SymPsd: {
      Mat m(v.rows, v.rows);
      int k = 0;
      for (int i = 0; i < v.rows; ++i)
        for (int j = i; j < v.rows; ++j) {
          m(i, j) = x[k];
          m(j, i) = x[k];
          ++k;
        }
      return m;
    }
    case VarKind::Free: {
      Mat m(v.rows, v.cols);
      int k = 0;
      for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) m(i, j) = x[k++];
      return m;
    }
    case VarKind::NonnegVector:
      return x;
    case VarKind::NonnegScalar:
      return Mat::Constant(1, 1, x[0]);
  }
  return {};
}

Mat AffineLmi::evaluate(const Assignment& a) const {
  Mat out = constant;
  for (const auto& [var, coeffs] : terms) {
    auto it = a.find(var);
    if (it == a.end())
      throw std::invalid_argument("evaluate: assignment missing " + var);
    // Reconstruct the entry vector; the coefficient list follows the same
    // convention, so any VarKind with matching entry count works.
    const Mat& value = it->second;
    int k = 0;
    if (value.cols() == 1 && coeffs.size() == static_cast<size_t>(value.rows())) {
      for (int i = 0; i < value.rows(); ++i) out += value(i, 0) * coeffs[k++];
    } else if (value.rows() == value.cols() &&
               coeffs.size() ==
                   static_cast<size_t>(value.rows() * (value.rows() + 1) / 2)) {
      for (int i = 0; i < value.rows(); ++i)
        for (int j = i; j < value.cols(); ++j) out += value(i, j) * coeffs[k++];
    } else if (coeffs.size() ==
               static_cast<size_t>(value.rows() * value.cols())) {
      for (int i = 0; i < value.rows(); ++i)
        for (int j = 0; j < value.cols(); ++j) out += value(i, j) * coeffs[k++];
    } else {
      throw std::invalid_argument("evaluate: shape mismatch for " + var);
    }
  }
  return out;
}

std::vector<Mat>& AffineLmi::term_slot(const VarSpec& v) {
  auto& slot = terms[v.name];
  if (slot.empty()) slot.assign(var_entries(v), Mat::Zero(size, size));
  return slot;
}

Mat selector(const std::vector<int>& dims, int index) {
  if (index < 1 || index > static_cast<int>(dims.size()))
    throw std::out_of_range("selector: index out of range");
  const int block = index - 1;
  int total = 0, offset = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (static_cast<int>(i) < block) offset += dims[i];
    total += dims[i];
  }
  Mat L = Mat::Zero(dims[block], total);
  L.middleCols(offset, dims[block]).setIdentity();
  return L;
}

void add_sym_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& K,
                       double factor) {
  if (v.kind != VarKind::SymPsd)
    throw std::invalid_argument("add_sym_quadratic: " + v.name +
                                " is not symmetric");
  if (K.rows() != v.rows || K.cols() != lmi.size)
    throw std::invalid_argument("add_sym_quadratic: K shape");
  auto& slot = lmi.term_slot(v);
  int k = 0;
  for (int i = 0; i < v.rows; ++i)
    for (int j = i; j < v.rows; ++j) {
      Mat outer = K.row(i).transpose() * K.row(j);
      if (i == j)
        slot[k] += factor * outer;
      else
        slot[k] += factor * (outer + outer.transpose());
      ++k;
    }
}

void add_free_sym_product(AffineLmi& lmi, const VarSpec& v, const Mat& A,
                          const Mat& B, double factor) {
  if (v.kind != VarKind::Free)
    throw std::invalid_argument("add_free_sym_product: " + v.name +
                                " is not free");
  if (A.rows() != v.rows || B.rows() != v.cols || A.cols() != lmi.size ||
      B.cols() != lmi.size)
    throw std::invalid_argument("add_free_sym_product: shapes for " + v.name);
  auto& slot = lmi.term_slot(v);
  int k = 0;
  for (int p = 0; p < v.rows; ++p)
    for (int q = 0; q < v.cols; ++q) {
      Mat outer = A.row(p).transpose() * B.row(q);
      slot[k++] += factor * (outer + outer.transpose());
    }
}

void add_gamma_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& U,
                         const Mat& V, double factor) {
  if (v.kind != VarKind::NonnegVector)
    throw std::invalid_argument("add_gamma_quadratic: " + v.name +
                                " is not a nonneg vector");
  if (U.rows() != v.rows || V.rows() != v.rows || U.cols() != lmi.size ||
      V.cols() != lmi.size)
    throw std::invalid_argument("add_gamma_quadratic: shapes for " + v.name);
  auto& slot = lmi.term_slot(v);
  for (int i = 0; i < v.rows; ++i) {
    Mat outer = U.row(i).transpose() * V.row(i);
    slot[i] += factor * (outer + outer.transpose());
  }
}

void add_scalar_quadratic(AffineLmi& lmi, const VarSpec& v, const Mat& K,
                          double factor) {
  if (v.kind != VarKind::NonnegScalar)
    throw std::invalid_argument("add_scalar_quadratic: " + v.name +
                                " is not a nonneg scalar");
  if (K.cols() != lmi.size)
    throw std::invalid_argument("add_scalar_quadratic: K shape");
  auto& slot = lmi.term_slot(v);
  slot[0] += factor * (K.transpose() * K);
}

DnnRelaxation relax_dnn(const Dnn& net, const Vec& x_star, const Vec& delta1) {
  net.validate();
  DnnRelaxation r;
  r.iso = isolation_maps(net);
  r.W1 = net.W[0];
  r.n = net.input_dim();
  r.m = net.output_dim();
  r.a = net.total_width();
  r.a1 = net.widths()[0];
  r.p1_star = net.W[0] * x_star + net.b[0];
  auto boxes = interval_bounds_seeded(net, r.p1_star, delta1);
  auto sec = stacked_sector_bounds(net, boxes);
  r.rho = sec.rho;
  r.sigma = sec.sigma;
  r.p1_bar = r.p1_star + delta1;
  return r;
}

const VarSpec& TheoremProgram::var(const std::string& name) const {
  for (const auto& v : vars)
    if (v.name == name) return v;
  throw std::invalid_argument("TheoremProgram::var: unknown " + name);
}

std::vector<LmiReport> feasibility_oracle(const std::vector<AffineLmi>& lmis,
                                          const Assignment& a, double tol) {
  std::vector<LmiReport> reports;
  reports.reserve(lmis.size());
  for (const auto& lmi : lmis) {
    Mat value = lmi.evaluate(a);
    LmiReport rep;
    rep.name = lmi.name;
    rep.min_eig = min_eig(value);
    rep.max_eig = max_eig(value);
    rep.ok = lmi.sense == Sense::NegDef ? rep.max_eig < tol
                                        : rep.min_eig > -tol;
    reports.push_back(std::move(rep));
  }
  return reports;
}

SchurCheck schur_check(const Mat& block, int tail) {
  const int head = static_cast<int>(block.rows()) - tail;
  if (head <= 0 || tail <= 0)
    throw std::invalid_argument("schur_check: bad partition");
  SchurCheck r;
  r.direct = max_eig(block) < 0.0;
  Mat A = block.topLeftCorner(head, head);
  Mat B = block.topRightCorner(head, tail);
  Mat C = block.bottomRightCorner(tail, tail);
  if (max_eig(C) >= 0.0) {
    r.via_schur = false;
    return r;
  }
  Mat schur = A - B * C.ldlt().solve(B.transpose());
  r.via_schur = max_eig(schur) < 0.0;
  return r;
}

}  // namespace ancert
