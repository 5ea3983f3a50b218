// Feedforward tanh network controller: evaluation, interval bound
// propagation, local sector relaxation, nonlinearity isolation maps, and the
// stacked quadratic constraint used by the certification LMIs.
#pragma once

#include <string>
#include <vector>

#include "ancert/common.hpp"

namespace ancert {

enum class Activation { Tanh };

// pi(x) = W[l] phi( ... phi(W[0] x + b[0]) ... ) + b[l]
// W.size() == b.size() == l+1 where l is the number of hidden layers.
struct Dnn {
  Activation act = Activation::Tanh;
  std::vector<Mat> W;
  std::vector<Vec> b;

  int hidden_layers() const { return static_cast<int>(W.size()) - 1; }
  int input_dim() const { return static_cast<int>(W.front().cols()); }
  int output_dim() const { return static_cast<int>(W.back().rows()); }
  // a_1 .. a_l
  std::vector<int> widths() const;
  // a = a_1 + ... + a_l
  int total_width() const;
  // Checks chained dimensions; throws std::invalid_argument on mismatch.
  void validate() const;
};

// JSON weight-file round trip. Format:
// {"activation":"tanh","layers":[{"W":[[...],...],"b":[...]},...]}
Dnn load_dnn(const std::string& path);
void save_dnn(const Dnn& net, const std::string& path);
Dnn dnn_from_json_text(const std::string& text);
std::string dnn_to_json_text(const Dnn& net);

double activation(Activation act, double p);

// Network output for one input.
Vec forward(const Dnn& net, const Vec& x);

// Per-hidden-layer pre-activation box [lo, hi].
struct LayerBox {
  Vec lo, hi;
};

// Standard IBP from an input box on x.
std::vector<LayerBox> interval_bounds(const Dnn& net, const Vec& x_lo,
                                      const Vec& x_hi);

// Seeded IBP: the first-layer pre-activation box is assumed directly
// (center p1_star, halfwidth delta, both length a_1) and deeper layers are
// propagated through the activation and the affine maps.
std::vector<LayerBox> interval_bounds_seeded(const Dnn& net, const Vec& p1_star,
                                             const Vec& delta);

// Elementwise local sector Sec[rho, sigma] of the activation over a
// pre-activation interval, taken through the origin: rho_i <= phi(p)/p <=
// sigma_i for all p in [lo_i, hi_i]. For tanh, phi(p)/p is even and strictly
// decreasing in |p| with limit 1 at 0.
struct SectorBounds {
  Vec rho, sigma;
};
SectorBounds sector_bounds(Activation act, const Vec& lo, const Vec& hi);

// Sector bounds for every hidden neuron, stacked layer by layer (length a).
SectorBounds stacked_sector_bounds(const Dnn& net,
                                   const std::vector<LayerBox>& boxes);

// Isolation maps: with m = Col(m_1..m_l) the stacked hidden activations and
// p = Col(p_1..p_l) the stacked pre-activations,
//   u = Pi_ux x + Pi_um m + Pi_u1,   p = Pi_px x + Pi_pm m + Pi_p1.
struct IsolationMaps {
  Mat Pi_ux, Pi_um;
  Vec Pi_u1;
  Mat Pi_px, Pi_pm;
  Vec Pi_p1;
};
IsolationMaps isolation_maps(const Dnn& net);

// Lemma-1 stacked quadratic constraint M_DNN (size 2a x 2a), acting on
// Col(delta_p, delta_m):
//   M_DNN = S^T [0, M_gamma; M_gamma, 0] S,  S = [M_sigma, -I; -M_rho, I].
Mat dnn_quadratic_constraint(const Vec& rho, const Vec& sigma,
                             const Vec& gamma);

// Two-hidden-layer zero-bias tanh surrogate of a linear gain: pi(x) ~ -K x
// with ||pi(x) + K x||_inf <= c * scale^2 * ||x||_inf^3 where
// c = (1 + scale^2) * max_i sum_j |K_ij| / 3 (tanh cubic remainder
// |tanh(t) - t| <= |t|^3 / 3 applied to both layers).
Dnn synthesize_surrogate(const Mat& K, int a1, int a2, double scale);

// The constant c in the surrogate contract above.
double surrogate_error_constant(const Mat& K, double scale);

}  // namespace ancert
