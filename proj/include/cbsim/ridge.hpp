#pragma once

#include <cstdint>
#include <vector>

#include "cbsim/types.hpp"

namespace cbsim {

/// Inputs of the confidence machinery: ridge regularizer, failure
/// probability, misspecification level and the deletion parameters.
struct ConfidenceParams {
  double lambda_reg = 1.0;
  double delta = 0.01;
  double eps_star = 0.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  int d = 0;
  long horizon = 0;

  void validate() const;
};

/// Per-scope running least-squares statistics. The Gram matrix is kept
/// unregularized; the regularizer enters only at solve time.
struct RidgeState {
  Mat gram;
  Vec moment;
  long pulls = 0;
  std::vector<Vec> history;     // served feature vectors, in order
  std::vector<long> rounds;     // global round stamp per history entry
  std::vector<double> rewards;  // reward per history entry

  explicit RidgeState(int d)
      : gram(Mat::Zero(d, d)), moment(Vec::Zero(d)) {}

  int dim() const { return static_cast<int>(moment.size()); }
};

void ridge_update(RidgeState& state, const Vec& x, double r, long round = 0);

/// Solves (lambda I + gram) theta = moment.
Vec ridge_estimate(const RidgeState& state, double lambda_reg);

/// sqrt((1 + ln(1 + T)) / (1 + T)); the per-scope deletion scale.
double f_threshold(double pulls);

/// sqrt(lambda) + sqrt(2 ln(1/delta) + d ln(1 + t_eff/(lambda d))).
double beta_radius(const ConfidenceParams& params, long t_eff);

/// integral_0^{lambda_x} (1 - exp(-(lambda_x - x)^2 / (2 sigma^2)))^C dx,
/// by adaptive Simpson quadrature (abs tol 1e-8, 40 refinement levels).
double tilde_lambda_x(double lambda_x, double sigma, int arm_count_cap);

/// 2 eps_star sqrt(2 / tlx).
double zeta(double eps_star, double tlx);

/// Pooled cluster statistics: regularized Gram, pooled moment, solved
/// estimate, and (optionally) the merged member history.
struct ClusterStats {
  Mat gram_reg;
  Mat gram_inv;
  Vec moment;
  Vec theta_hat;
  long pulls = 0;
  std::vector<Vec> member_history;  // populated only when requested
};

ClusterStats aggregate_cluster(const std::vector<const RidgeState*>& members,
                               double lambda_reg, int d,
                               bool collect_history = false);

/// Member histories interleaved by global round stamp.
std::vector<Vec> merge_member_histories(const std::vector<const RidgeState*>& members);

/// Builds ClusterStats directly from a pooled (unregularized) Gram and
/// moment; used by policies that maintain cluster sums incrementally.
ClusterStats make_cluster_stats(const Mat& gram, const Vec& moment,
                                long pulls, double lambda_reg);

/// min{1, x'theta + beta ||x||_{M^-1} + eps_star * S}. With exact_sum,
/// S = sum over member history of |x' M^-1 x_s|; otherwise the
/// Cauchy-Schwarz surrogate sqrt(pulls) ||x||_{M^-1}.
double ucb_index(const Vec& x, const ClusterStats& cluster, double beta,
                 double eps_star, bool exact_sum);

/// Same index without the min{1, .} clamp; used by tests auditing the
/// robust-vs-plain bonus difference.
double ucb_index_unclamped(const Vec& x, const ClusterStats& cluster,
                           double beta, double eps_star, bool exact_sum);

/// Rank-one maintained ridge estimator: keeps (lambda I + M)^-1 via the
/// Sherman-Morrison identity. Optimization path; the dense solve in
/// ridge_estimate is the reference it is tested against.
class IncrementalRidge {
 public:
  IncrementalRidge(int d, double lambda_reg);

  void update(const Vec& x, double r);

  const Vec& theta() const { return theta_; }
  const Mat& inverse() const { return inv_; }
  long pulls() const { return pulls_; }
  const std::vector<Vec>& history() const { return history_; }

  ClusterStats as_cluster_stats(bool collect_history) const;

 private:
  Mat inv_;
  Vec moment_;
  Vec theta_;
  long pulls_ = 0;
  std::vector<Vec> history_;
};

}  // namespace cbsim
