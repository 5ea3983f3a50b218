#include "ancert/dnn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ancert {

std::vector<int> Dnn::widths() const {
  std::vector<int> a;
  for (int i = 0; i + 1 < static_cast<int>(W.size()); ++i)
    a.push_back(static_cast<int>(W[i].rows()));
  return a;
}

int Dnn::total_width() const {
  int a = 0;
  for (int w : widths()) a += w;
  return a;
}

void Dnn::validate() const {
  if (W.empty() || W.size() != b.size())
    throw std::invalid_argument("dnn: need matching W/b lists, l+1 layers");
  for (size_t i = 0; i < W.size(); ++i) {
    if (W[i].rows() != b[i].size())
      throw std::invalid_argument("dnn: bias length mismatch at layer " +
                                  std::to_string(i + 1));
    if (i + 1 < W.size() && W[i + 1].cols() != W[i].rows())
      throw std::invalid_argument("dnn: weight chain mismatch at layer " +
                                  std::to_string(i + 2));
  }
}

double activation(Activation act, double p) {
  switch (act) {
    case Activation::Tanh:
      return std::tanh(p);
  }
  return p;
}

Vec forward(const Dnn& net, const Vec& x) {
  Vec h = x;
  const int l = net.hidden_layers();
  for (int i = 0; i < l; ++i) {
    Vec p = net.W[i] * h + net.b[i];
    h = p.unaryExpr([&](double t) { return activation(net.act, t); });
  }
  return net.W[l] * h + net.b[l];
}

namespace {

// Affine image of a box through W(.) + b, by center/radius arithmetic.
LayerBox affine_box(const Mat& W, const Vec& b, const Vec& lo, const Vec& hi) {
  Vec c = 0.5 * (lo + hi);
  Vec r = 0.5 * (hi - lo);
  Vec pc = W * c + b;
  Vec pr = W.cwiseAbs() * r;
  return {pc - pr, pc + pr};
}

// tanh is monotone, so boxes map endpoint-wise.
LayerBox act_box(Activation act, const LayerBox& box) {
  return {box.lo.unaryExpr([&](double t) { return activation(act, t); }),
          box.hi.unaryExpr([&](double t) { return activation(act, t); })};
}

std::vector<LayerBox> propagate(const Dnn& net, LayerBox first) {
  std::vector<LayerBox> boxes;
  boxes.push_back(std::move(first));
  const int l = net.hidden_layers();
  for (int i = 1; i < l; ++i) {
    LayerBox m = act_box(net.act, boxes.back());
    boxes.push_back(affine_box(net.W[i], net.b[i], m.lo, m.hi));
  }
  return boxes;
}

}  // namespace

std::vector<LayerBox> interval_bounds(const Dnn& net, const Vec& x_lo,
                                      const Vec& x_hi) {
  net.validate();
  return propagate(net, affine_box(net.W[0], net.b[0], x_lo, x_hi));
}

std::vector<LayerBox> interval_bounds_seeded(const Dnn& net,
                                             const Vec& p1_star,
                                             const Vec& delta) {
  net.validate();
  if (delta.minCoeff() < 0.0)
    throw std::invalid_argument("interval_bounds_seeded: negative halfwidth");
  return propagate(net, LayerBox{p1_star - delta, p1_star + delta});
}

namespace {

// Secant slope tanh(p)/p, continuously extended to 1 at p = 0.
double tanh_secant(double p) {
  if (std::abs(p) < 1e-12) return 1.0 - p * p / 3.0;
  return std::tanh(p) / p;
}

}  // namespace

SectorBounds sector_bounds(Activation act, const Vec& lo, const Vec& hi) {
  if (act != Activation::Tanh)
    throw std::invalid_argument("sector_bounds: unsupported activation");
  const auto n = lo.size();
  if (hi.size() != n) throw std::invalid_argument("sector_bounds: size");
  SectorBounds s{Vec(n), Vec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo[i] > hi[i])
      throw std::invalid_argument("sector_bounds: empty interval");
    const double sl = tanh_secant(lo[i]);
    const double sh = tanh_secant(hi[i]);
    s.rho[i] = std::min(sl, sh);
    // tanh(p)/p decreases in |p|, so the supremum over the interval sits at
    // the point closest to the origin (the origin itself if contained).
    s.sigma[i] = (lo[i] <= 0.0 && hi[i] >= 0.0)
                     ? 1.0
                     : tanh_secant(std::abs(lo[i]) < std::abs(hi[i]) ? lo[i]
                                                                     : hi[i]);
  }
  return s;
}

SectorBounds stacked_sector_bounds(const Dnn& net,
                                   const std::vector<LayerBox>& boxes) {
  const int a = net.total_width();
  SectorBounds s{Vec(a), Vec(a)};
  int at = 0;
  for (const auto& box : boxes) {
    SectorBounds layer = sector_bounds(net.act, box.lo, box.hi);
    s.rho.segment(at, layer.rho.size()) = layer.rho;
    s.sigma.segment(at, layer.sigma.size()) = layer.sigma;
    at += static_cast<int>(layer.rho.size());
  }
  if (at != a)
    throw std::invalid_argument("stacked_sector_bounds: box/layer mismatch");
  return s;
}

IsolationMaps isolation_maps(const Dnn& net) {
  net.validate();
  const int l = net.hidden_layers();
  const int n = net.input_dim();
  const int m = net.output_dim();
  const int a = net.total_width();
  const std::vector<int> aw = net.widths();

  IsolationMaps iso;
  iso.Pi_ux = Mat::Zero(m, n);
  iso.Pi_um = Mat::Zero(m, a);
  iso.Pi_um.rightCols(aw[l - 1]) = net.W[l];
  iso.Pi_u1 = net.b[l];

  iso.Pi_px = Mat::Zero(a, n);
  iso.Pi_px.topRows(aw[0]) = net.W[0];
  iso.Pi_p1 = Vec(a);
  iso.Pi_pm = Mat::Zero(a, a);
  int row = 0;
  for (int i = 0; i < l; ++i) {
    iso.Pi_p1.segment(row, aw[i]) = net.b[i];
    if (i > 0) {
      // p_{i+1} = W_{i+1} m_i + b_{i+1}: block W[i] one column block left of
      // the diagonal.
      int col = 0;
      for (int j = 0; j + 1 < i; ++j) col += aw[j];
      iso.Pi_pm.block(row, col, aw[i], aw[i - 1]) = net.W[i];
    }
    row += aw[i];
  }
  return iso;
}

Mat dnn_quadratic_constraint(const Vec& rho, const Vec& sigma,
                             const Vec& gamma) {
  const auto a = rho.size();
  if (sigma.size() != a || gamma.size() != a)
    throw std::invalid_argument("dnn_quadratic_constraint: size mismatch");
  Mat S(2 * a, 2 * a);
  S << Mat(sigma.asDiagonal()), -Mat::Identity(a, a),
      -Mat(rho.asDiagonal()), Mat::Identity(a, a);
  Mat mid = Mat::Zero(2 * a, 2 * a);
  mid.topRightCorner(a, a) = Mat(gamma.asDiagonal());
  mid.bottomLeftCorner(a, a) = Mat(gamma.asDiagonal());
  return S.transpose() * mid * S;
}

Dnn synthesize_surrogate(const Mat& K, int a1, int a2, double scale) {
  const int m = static_cast<int>(K.rows());
  const int n = static_cast<int>(K.cols());
  if (a1 < n || a2 < n)
    throw std::invalid_argument("synthesize_surrogate: widths must be >= n");
  if (scale <= 0.0)
    throw std::invalid_argument("synthesize_surrogate: scale must be > 0");
  Dnn net;
  net.W.resize(3);
  net.b.resize(3);
  net.W[0] = Mat::Zero(a1, n);
  net.W[0].topLeftCorner(n, n) = scale * Mat::Identity(n, n);
  net.W[1] = Mat::Zero(a2, a1);
  net.W[1].topLeftCorner(n, n) = scale * Mat::Identity(n, n);
  net.W[2] = Mat::Zero(m, a2);
  net.W[2].leftCols(n) = -K / (scale * scale);
  net.b[0] = Vec::Zero(a1);
  net.b[1] = Vec::Zero(a2);
  net.b[2] = Vec::Zero(m);
  return net;
}

double surrogate_error_constant(const Mat& K, double scale) {
  return (1.0 + scale * scale) * K.cwiseAbs().rowwise().sum().maxCoeff() / 3.0;
}

Dnn dnn_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Dnn net;
  const std::string act = j.value("activation", "tanh");
  if (act != "tanh")
    throw std::invalid_argument("dnn: unsupported activation '" + act + "'");
  net.act = Activation::Tanh;
  for (const auto& layer : j.at("layers")) {
    const auto& wj = layer.at("W");
    const int rows = static_cast<int>(wj.size());
    const int cols = rows > 0 ? static_cast<int>(wj[0].size()) : 0;
    Mat W(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (static_cast<int>(wj[r].size()) != cols)
        throw std::invalid_argument("dnn: ragged weight matrix");
      for (int c = 0; c < cols; ++c) W(r, c) = wj[r][c].get<double>();
    }
    const auto& bj = layer.at("b");
    Vec b(static_cast<int>(bj.size()));
    for (int r = 0; r < b.size(); ++r) b[r] = bj[r].get<double>();
    net.W.push_back(std::move(W));
    net.b.push_back(std::move(b));
  }
  net.validate();
  return net;
}

std::string dnn_to_json_text(const Dnn& net) {
  nlohmann::json j;
  j["activation"] = "tanh";
  j["layers"] = nlohmann::json::array();
  for (size_t i = 0; i < net.W.size(); ++i) {
    nlohmann::json layer;
    layer["W"] = nlohmann::json::array();
    for (int r = 0; r < net.W[i].rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < net.W[i].cols(); ++c) row.push_back(net.W[i](r, c));
      layer["W"].push_back(row);
    }
    layer["b"] = nlohmann::json::array();
    for (int r = 0; r < net.b[i].size(); ++r) layer["b"].push_back(net.b[i][r]);
    j["layers"].push_back(layer);
  }
  return j.dump(2);
}

Dnn load_dnn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dnn file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return dnn_from_json_text(ss.str());
}

void save_dnn(const Dnn& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dnn file: " + path);
  out << dnn_to_json_text(net) << "\n";
}

}  // namespace ancert
