#include "ancert/triggers.hpp"

#include <stdexcept>

namespace ancert {

namespace {
double quad(const Mat& Q, const Vec& v) {
  return (v.transpose() * Q * v).value();
}
}  // namespace

double et_beta(const EventTriggerParams& p, const Vec& x_now, const Vec& x_kq,
               const Vec& x_star) {
  Vec d_now = x_now - x_star;
  Vec d_kq = x_kq - x_star;
  Vec e = x_now - x_kq;
  return p.eps1 * quad(p.Xi1, d_now) + p.eps2 * quad(p.Xi1, d_kq) -
         quad(p.Xi2, e);
}

EtStep et_step(const EventTriggerParams& p, double alpha, const Vec& x_now,
               const Vec& x_kq, const Vec& x_star) {
  EtStep r;
  r.beta = et_beta(p, x_now, x_kq, x_star);
  r.fire = alpha + p.g * r.beta < 0.0;
  // On a transmission the held state is replaced by the current sample, so
  // the error resets and the recursion sees the post-reset beta; this is what
  // keeps alpha >= 0 whenever 1 - mu - 1/g >= 0 (Remark-1 invariant).
  const double beta_used = r.fire ? et_beta(p, x_now, x_now, x_star) : r.beta;
  r.alpha_next = (1.0 - p.mu) * alpha + beta_used;
  return r;
}

double st_condition(const SelfTriggerParams& p, const Vec& x_pred,
                    const Vec& x_kq, const Vec& x_star) {
  Vec dp = x_pred - x_star;
  Vec dq = x_kq - x_star;
  Mat m11 = p.e1 * p.Xi1 - p.Xi2;
  Mat m22 = p.e2 * p.Xi1 - p.Xi2;
  return quad(m11, dp) + quad(m22, dq) +
         2.0 * (dp.transpose() * p.Xi2 * dq).value();
}

int st_next(const SelfTriggerParams& p, const Vec& x_kq, const Vec& x_star,
            const Predictor& predict) {
  if (p.s_bar < 1) throw std::invalid_argument("st_next: s_bar must be >= 1");
  int best = 1;
  for (int s = 1; s <= p.s_bar; ++s) {
    if (st_condition(p, predict(s), x_kq, x_star) >= 0.0) best = s;
  }
  return best;
}

}  // namespace ancert
