#include "cbsim/policy_rsclumb.hpp"

#include <bit>
#include <stdexcept>

namespace cbsim {

std::pair<long, long> phase_schedule(long tau) {
  if (tau < 1) throw std::invalid_argument("phase_schedule: tau must be >= 1");
  // tau + 2 in (2^s, 2^(s+1)]
  const unsigned long long w = static_cast<unsigned long long>(tau + 1);
  const long s = static_cast<long>(std::bit_width(w)) - 1;
  const long t = tau - ((1L << s) - 2);
  return {s, t};
}

void RsclumbPolicy::init(int user_count, int dim, const ConfidenceParams& params) {
  params_ = params;
  params_.validate();
  beta_ = beta_radius(params_, params_.horizon);
  eps_ = options_.robust ? params_.eps_star : 0.0;
  users_.assign(user_count, RidgeState(dim));
  theta_hat_.assign(user_count, Vec::Zero(dim));
  checked_.assign(user_count, 0);
  clusters_.clear();
  Cluster all;
  for (int i = 0; i < user_count; ++i) all.members.insert(i);
  all.gram = Mat::Zero(dim, dim);
  all.moment = Vec::Zero(dim);
  clusters_[0] = std::move(all);
  assignment_.assign(user_count, 0);
  next_cluster_id_ = 1;
  tau_ = 0;
  phase_ = 0;
}

Vec RsclumbPolicy::cluster_mean_estimate(int cluster_id) const {
  const Cluster& c = clusters_.at(cluster_id);
  Vec sum = Vec::Zero(params_.d);
  for (int i : c.members) sum += theta_hat_[i];
  return sum / static_cast<double>(c.members.size());
}

int RsclumbPolicy::choose(int user, const std::vector<Vec>& arms) {
  if (arms.empty()) throw std::invalid_argument("RsclumbPolicy::choose: empty arm list");
  const Cluster& c = clusters_.at(assignment_[user]);
  ClusterStats stats = make_cluster_stats(c.gram, c.moment, c.pulls, params_.lambda_reg);
  if (options_.exact_ucb_sum && eps_ > 0.0) {
    std::vector<const RidgeState*> states;
    states.reserve(c.members.size());
    for (int m : c.members) states.push_back(&users_[m]);
    stats.member_history = merge_member_histories(states);
  }
  std::vector<double> indices(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    indices[a] = ucb_index(arms[a], stats, beta_, eps_, options_.exact_ucb_sum);
  }
  return argmax_lowest(indices);
}

void RsclumbPolicy::begin_round() {
  const long tau = tau_ + 1;
  const auto [s, t] = phase_schedule(tau);
  if (s != phase_) {
    phase_ = s;
    std::fill(checked_.begin(), checked_.end(), 0);
    // phase-start snapshots (pull counts and estimates) are implied by
    // the live statistics; nothing else to recompute here
  }
}

void RsclumbPolicy::feedback(int user, const Vec& arm, double reward) {
  begin_round();
  ++tau_;
  ridge_update(users_[user], arm, reward, tau_);
  theta_hat_[user] = ridge_estimate(users_[user], params_.lambda_reg);
  Cluster& c = clusters_.at(assignment_[user]);
  c.gram.noalias() += arm * arm.transpose();
  c.moment.noalias() += reward * arm;
  c.pulls += 1;
  if (!checked_[user]) {
    split(user);
    checked_[user] = 1;
    merge();
  }
}

void RsclumbPolicy::split(int user) {
  const int j = assignment_[user];
  Cluster& c = clusters_.at(j);
  if (c.members.size() <= 1) return;  // theta tilde of a singleton equals theta hat
  const Vec tilde = cluster_mean_estimate(j);
  const double alpha2_term = options_.robust ? params_.alpha2 * params_.eps_star : 0.0;
  const double threshold =
      params_.alpha1 * (f_threshold(static_cast<double>(users_[user].pulls)) +
                        f_threshold(static_cast<double>(c.pulls))) +
      alpha2_term;
  if ((theta_hat_[user] - tilde).norm() <= threshold) return;
  const RidgeState& us = users_[user];
  c.gram -= us.gram;
  c.moment -= us.moment;
  c.pulls -= us.pulls;
  c.members.erase(user);
  Cluster fresh;
  fresh.members.insert(user);
  fresh.gram = us.gram;
  fresh.moment = us.moment;
  fresh.pulls = us.pulls;
  const int id = next_cluster_id_++;
  clusters_[id] = std::move(fresh);
  assignment_[user] = id;
}

bool RsclumbPolicy::cluster_checked(const Cluster& c) const {
  for (int i : c.members) {
    if (!checked_[i]) return false;
  }
  return true;
}

void RsclumbPolicy::merge() {
  const double alpha2_term =
      options_.robust ? 0.5 * params_.alpha2 * params_.eps_star : 0.0;
  bool merged = true;
  while (merged) {
    merged = false;
    for (auto it1 = clusters_.begin(); it1 != clusters_.end() && !merged; ++it1) {
      if (!cluster_checked(it1->second)) continue;
      auto it2 = it1;
      for (++it2; it2 != clusters_.end(); ++it2) {
        if (!cluster_checked(it2->second)) continue;
        const double threshold =
            0.5 * params_.alpha1 *
                (f_threshold(static_cast<double>(it1->second.pulls)) +
                 f_threshold(static_cast<double>(it2->second.pulls))) +
            alpha2_term;
        const Vec gap =
            cluster_mean_estimate(it1->first) - cluster_mean_estimate(it2->first);
        if (gap.norm() < threshold) {
          Cluster& keep = it1->second;
          Cluster& drop = it2->second;
          keep.gram += drop.gram;
          keep.moment += drop.moment;
          keep.pulls += drop.pulls;
          for (int i : drop.members) {
            keep.members.insert(i);
            assignment_[i] = it1->first;
          }
          clusters_.erase(it2);
          merged = true;
          break;
        }
      }
    }
  }
}

}  // namespace cbsim
