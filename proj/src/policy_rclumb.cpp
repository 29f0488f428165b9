#include "cbsim/policy_rclumb.hpp"

#include <stdexcept>

namespace cbsim {

int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void RclumbPolicy::init(int user_count, int dim, const ConfidenceParams& params) {
  params_ = params;
  params_.validate();
  beta_ = beta_radius(params_, params_.horizon);
  eps_ = options_.robust ? params_.eps_star : 0.0;
  graph_ = std::make_unique<UserGraph>(user_count);
  users_.assign(user_count, RidgeState(dim));
  theta_hat_.assign(user_count, Vec::Zero(dim));
  round_ = 0;
  trace_.clear();
}

std::vector<int> RclumbPolicy::extract_cluster(int user) const {
  return options_.component_mode ? graph_->component(user) : graph_->one_hop(user);
}

int RclumbPolicy::choose(int user, const std::vector<Vec>& arms) {
  if (arms.empty()) throw std::invalid_argument("RclumbPolicy::choose: empty arm list");
  const std::vector<int> members = extract_cluster(user);
  std::vector<const RidgeState*> states;
  states.reserve(members.size());
  for (int m : members) states.push_back(&users_[m]);
  const bool need_history = options_.exact_ucb_sum && eps_ > 0.0;
  const ClusterStats cluster =
      aggregate_cluster(states, params_.lambda_reg, params_.d, need_history);
  std::vector<double> indices(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    indices[a] = ucb_index(arms[a], cluster, beta_, eps_, options_.exact_ucb_sum);
  }
  if (options_.record_clusters) trace_.push_back({user, members});
  return argmax_lowest(indices);
}

void RclumbPolicy::feedback(int user, const Vec& arm, double reward) {
  ++round_;
  ridge_update(users_[user], arm, reward, round_);
  theta_hat_[user] = ridge_estimate(users_[user], params_.lambda_reg);
  delete_edges(user);
}

void RclumbPolicy::delete_edges(int user) {
  const double alpha2_term = options_.robust ? params_.alpha2 * params_.eps_star : 0.0;
  const double fi = f_threshold(static_cast<double>(users_[user].pulls));
  for (int l = 0; l < graph_->user_count(); ++l) {
    if (l == user || !graph_->has_edge(user, l)) continue;
    const double threshold =
        params_.alpha1 * (fi + f_threshold(static_cast<double>(users_[l].pulls))) +
        alpha2_term;
    const double gap = (theta_hat_[user] - theta_hat_[l]).norm();
    if (gap >= threshold) graph_->delete_edge(user, l);
  }
}

}  // namespace cbsim
