// Shared scalar/matrix typedefs and small helpers used across the toolkit.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace ancert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

// Sym(M) = M + M^T (the paper's He/Sym operator).
inline Mat sym(const Mat& m) { return m + m.transpose(); }

// Force exact numerical symmetry (cheap hygiene after accumulations).
inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double max_eig(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double min_eig(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Named matrix assignment: variable name -> full matrix value.
using Assignment = std::map<std::string, Mat>;

}  // namespace ancert
