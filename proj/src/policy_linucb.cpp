#include "cbsim/policy_linucb.hpp"

#include <stdexcept>

namespace cbsim {

void LinUcbPolicy::init(int user_count, int dim, const ConfidenceParams& params) {
  params_ = params;
  params_.validate();
  beta_ = beta_radius(params_, params_.horizon);
  eps_ = robust_ ? params_.eps_star : 0.0;
  const int n = scope_ == LinUcbScope::Global ? 1 : user_count;
  states_.assign(n, IncrementalRidge(dim, params_.lambda_reg));
}

int LinUcbPolicy::choose(int user, const std::vector<Vec>& arms) {
  if (arms.empty()) throw std::invalid_argument("LinUcbPolicy::choose: empty arm list");
  const IncrementalRidge& est = estimator(user);
  const bool need_history = exact_ucb_sum_ && eps_ > 0.0;
  const ClusterStats stats = est.as_cluster_stats(need_history);
  std::vector<double> indices(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    indices[a] = ucb_index(arms[a], stats, beta_, eps_, exact_ucb_sum_);
  }
  return argmax_lowest(indices);
}

void LinUcbPolicy::feedback(int user, const Vec& arm, double reward) {
  states_[scope_ == LinUcbScope::Global ? 0 : user].update(arm, reward);
}

}  // namespace cbsim
