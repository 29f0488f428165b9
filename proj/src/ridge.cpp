#include "cbsim/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace cbsim {

void ConfidenceParams::validate() const {
  if (lambda_reg <= 0.0) throw std::invalid_argument("lambda_reg must be positive");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta must lie in (0,1)");
  if (eps_star < 0.0) throw std::invalid_argument("eps_star must be nonnegative");
  if (alpha1 <= 0.0) throw std::invalid_argument("alpha1 must be positive");
  if (alpha2 < 0.0) throw std::invalid_argument("alpha2 must be nonnegative");
}

void ridge_update(RidgeState& state, const Vec& x, double r, long round) {
  if (x.size() != state.moment.size()) {
    throw std::invalid_argument("ridge_update: feature dimension " +
                                std::to_string(x.size()) + " does not match state dimension " +
                                std::to_string(state.moment.size()));
  }
  state.gram.noalias() += x * x.transpose();
  state.moment.noalias() += r * x;
  state.pulls += 1;
  state.history.push_back(x);
  state.rounds.push_back(round);
  state.rewards.push_back(r);
}

Vec ridge_estimate(const RidgeState& state, double lambda_reg) {
  if (lambda_reg <= 0.0) throw std::invalid_argument("ridge_estimate: lambda_reg must be positive");
  const int d = state.dim();
  Mat reg = state.gram;
  reg.diagonal().array() += lambda_reg;
  return reg.llt().solve(state.moment);
}

double f_threshold(double pulls) {
  return std::sqrt((1.0 + std::log1p(pulls)) / (1.0 + pulls));
}

double beta_radius(const ConfidenceParams& params, long t_eff) {
  const double lambda = params.lambda_reg;
  const double d = static_cast<double>(params.d);
  return std::sqrt(lambda) +
         std::sqrt(2.0 * std::log(1.0 / params.delta) +
                   d * std::log(1.0 + static_cast<double>(t_eff) / (lambda * d)));
}

namespace {

double tlx_integrand(double x, double lambda_x, double two_sigma_sq, int cap) {
  const double g = lambda_x - x;
  return std::pow(1.0 - std::exp(-g * g / two_sigma_sq), cap);
}

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth,
                        double lambda_x, double two_sigma_sq, int cap,
                        bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = tlx_integrand(lm, lambda_x, two_sigma_sq, cap);
  const double frm = tlx_integrand(rm, lambda_x, two_sigma_sq, cap);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= 40) {
    converged = false;
    return left + right;
  }
  return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2.0, depth + 1,
                          lambda_x, two_sigma_sq, cap, converged) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol / 2.0, depth + 1,
                          lambda_x, two_sigma_sq, cap, converged);
}

}  // namespace

double tilde_lambda_x(double lambda_x, double sigma, int arm_count_cap) {
  if (lambda_x <= 0.0 || sigma <= 0.0 || arm_count_cap <= 0) {
    throw std::invalid_argument("tilde_lambda_x: inputs must be positive");
  }
  const double two_sigma_sq = 2.0 * sigma * sigma;
  const double a = 0.0, b = lambda_x;
  const double fa = tlx_integrand(a, lambda_x, two_sigma_sq, arm_count_cap);
  const double fb = tlx_integrand(b, lambda_x, two_sigma_sq, arm_count_cap);
  const double fm = tlx_integrand(0.5 * (a + b), lambda_x, two_sigma_sq, arm_count_cap);
  const double whole = simpson(fa, fm, fb, b - a);
  bool converged = true;
  const double value = adaptive_simpson(a, b, fa, fm, fb, whole, 1e-8, 0,
                                        lambda_x, two_sigma_sq, arm_count_cap,
                                        converged);
  if (!converged) {
    throw std::runtime_error("tilde_lambda_x: quadrature did not reach tolerance within 40 refinements");
  }
  return std::clamp(value, 0.0, lambda_x);
}

double zeta(double eps_star, double tlx) {
  if (tlx <= 0.0) throw std::invalid_argument("zeta: tlx must be positive");
  return 2.0 * eps_star * std::sqrt(2.0 / tlx);
}

namespace {

void finalize_cluster(ClusterStats& cs, double lambda_reg) {
  cs.gram_reg.diagonal().array() += lambda_reg;
  Eigen::LLT<Mat> llt(cs.gram_reg);
  cs.theta_hat = llt.solve(cs.moment);
  cs.gram_inv = llt.solve(Mat::Identity(cs.gram_reg.rows(), cs.gram_reg.cols()));
}

}  // namespace

ClusterStats aggregate_cluster(const std::vector<const RidgeState*>& members,
                               double lambda_reg, int d, bool collect_history) {
  ClusterStats cs;
  cs.gram_reg = Mat::Zero(d, d);
  cs.moment = Vec::Zero(d);
  for (const RidgeState* m : members) {
    if (m->dim() != d) throw std::invalid_argument("aggregate_cluster: member dimension mismatch");
    cs.gram_reg += m->gram;
    cs.moment += m->moment;
    cs.pulls += m->pulls;
  }
  finalize_cluster(cs, lambda_reg);
  if (collect_history) cs.member_history = merge_member_histories(members);
  return cs;
}

std::vector<Vec> merge_member_histories(const std::vector<const RidgeState*>& members) {
  struct Cursor { const RidgeState* s; std::size_t i; };
  auto later = [](const Cursor& a, const Cursor& b) {
    return a.s->rounds[a.i] > b.s->rounds[b.i];
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(later)> heads(later);
  std::size_t total = 0;
  for (const RidgeState* m : members) {
    total += m->history.size();
    if (!m->history.empty()) heads.push({m, 0});
  }
  std::vector<Vec> merged;
  merged.reserve(total);
  while (!heads.empty()) {
    Cursor c = heads.top();
    heads.pop();
    merged.push_back(c.s->history[c.i]);
    if (++c.i < c.s->history.size()) heads.push(c);
  }
  return merged;
}

ClusterStats make_cluster_stats(const Mat& gram, const Vec& moment, long pulls,
                                double lambda_reg) {
  ClusterStats cs;
  cs.gram_reg = gram;
  cs.moment = moment;
  cs.pulls = pulls;
  finalize_cluster(cs, lambda_reg);
  return cs;
}

namespace {

double ucb_core(const Vec& x, const ClusterStats& cluster, double beta,
                double eps_star, bool exact_sum) {
  const Vec y = cluster.gram_inv * x;
  const double width = std::sqrt(std::max(0.0, x.dot(y)));
  double value = x.dot(cluster.theta_hat) + beta * width;
  if (eps_star > 0.0) {
    double s;
    if (exact_sum) {
      s = 0.0;
      for (const Vec& xs : cluster.member_history) s += std::abs(y.dot(xs));
    } else {
      s = std::sqrt(static_cast<double>(cluster.pulls)) * width;
    }
    value += eps_star * s;
  }
  return value;
}

}  // namespace

double ucb_index(const Vec& x, const ClusterStats& cluster, double beta,
                 double eps_star, bool exact_sum) {
  return std::min(1.0, ucb_core(x, cluster, beta, eps_star, exact_sum));
}

double ucb_index_unclamped(const Vec& x, const ClusterStats& cluster,
                           double beta, double eps_star, bool exact_sum) {
  return ucb_core(x, cluster, beta, eps_star, exact_sum);
}

IncrementalRidge::IncrementalRidge(int d, double lambda_reg)
    : inv_(Mat::Identity(d, d) / lambda_reg),
      moment_(Vec::Zero(d)),
      theta_(Vec::Zero(d)) {
  if (lambda_reg <= 0.0) throw std::invalid_argument("IncrementalRidge: lambda_reg must be positive");
}

void IncrementalRidge::update(const Vec& x, double r) {
  const Vec ix = inv_ * x;
  const double denom = 1.0 + x.dot(ix);
  inv_.noalias() -= (ix * ix.transpose()) / denom;
  moment_.noalias() += r * x;
  theta_.noalias() = inv_ * moment_;
  pulls_ += 1;
  history_.push_back(x);
}

ClusterStats IncrementalRidge::as_cluster_stats(bool collect_history) const {
  ClusterStats cs;
  cs.gram_inv = inv_;
  cs.moment = moment_;
  cs.theta_hat = theta_;
  cs.pulls = pulls_;
  if (collect_history) cs.member_history = history_;
  return cs;
}

}  // namespace cbsim
