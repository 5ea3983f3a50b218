// Event-triggered (dynamic alpha + quadratic beta) and self-triggered
// (predictive S-condition) sampling logic.
#pragma once

#include <functional>

#include "ancert/common.hpp"

namespace ancert {

// Dynamic event trigger evaluated every theta sampling steps:
//   beta  = eps1 ||x_now - x*||^2_{Xi1} + eps2 ||x_kq - x*||^2_{Xi1}
//           - ||x_now - x_kq||^2_{Xi2}
//   fire  = (alpha + g * beta < 0)
//   alpha+ = (1 - mu) alpha + beta
struct EventTriggerParams {
  double eps1 = 0.003, eps2 = 0.002;
  double mu = 0.05, g = 500.0;
  int theta = 1;  // inter-sample spacing (steps)
  Mat Xi1, Xi2;
  // Remark-1 prerequisite for nonnegativity of the dynamic variable.
  bool admissible() const { return 1.0 - mu - 1.0 / g >= 0.0 && g > 0.0; }
};

double et_beta(const EventTriggerParams& p, const Vec& x_now, const Vec& x_kq,
               const Vec& x_star);

struct EtStep {
  bool fire = false;
  double beta = 0.0;
  double alpha_next = 0.0;
};
EtStep et_step(const EventTriggerParams& p, double alpha, const Vec& x_now,
               const Vec& x_kq, const Vec& x_star);

// Self trigger: S(x_pred, x_kq) >= 0 keeps the loop open until s steps.
//   S = Col(x_pred - x*, x_kq - x*)^T [[e1*Xi1 - Xi2, Xi2],
//                                      [Xi2, e2*Xi1 - Xi2]] Col(...)
struct SelfTriggerParams {
  double e1 = 0.8, e2 = 0.6;
  int s_bar = 10;
  Mat Xi1, Xi2;
};

double st_condition(const SelfTriggerParams& p, const Vec& x_pred,
                    const Vec& x_kq, const Vec& x_star);

// Next inter-transmission gap: max{ s in [1, s_bar] : S(predict(s)) >= 0 },
// taken over the whole satisfying set (not first-failure); 1 if empty.
using Predictor = std::function<Vec(int)>;
int st_next(const SelfTriggerParams& p, const Vec& x_kq, const Vec& x_star,
            const Predictor& predict);

}  // namespace ancert
