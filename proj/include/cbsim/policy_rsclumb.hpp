#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cbsim/policy.hpp"

namespace cbsim {

/// Doubling-phase clock: round tau = 2^s - 2 + t with 1 <= t <= 2^s.
std::pair<long, long> phase_schedule(long tau);

struct RsclumbOptions {
  bool robust = true;        // eps_star inflation + alpha2 split/merge terms
  bool exact_ucb_sum = true;
};

/// Set-based clustering policy with doubling phases, checked marks,
/// split and merge, and dual cluster estimators (pooled for
/// recommendation, averaged for clustering). With robust=false this is
/// the SCLUB baseline.
class RsclumbPolicy : public Policy {
 public:
  explicit RsclumbPolicy(RsclumbOptions options = {}, std::string name = "rsclumb")
      : options_(options), name_(std::move(name)) {}

  void init(int user_count, int dim, const ConfidenceParams& params) override;
  int choose(int user, const std::vector<Vec>& arms) override;
  void feedback(int user, const Vec& arm, double reward) override;
  std::string name() const override { return name_; }

  struct Cluster {
    std::set<int> members;
    Mat gram;
    Vec moment;
    long pulls = 0;
  };

  const std::map<int, Cluster>& clusters() const { return clusters_; }
  int cluster_of(int user) const { return assignment_[user]; }
  bool is_checked(int user) const { return checked_[user] != 0; }
  long current_phase() const { return phase_; }
  const RidgeState& user_state(int i) const { return users_[i]; }

  /// Average of the members' per-user ridge estimates (theta tilde).
  Vec cluster_mean_estimate(int cluster_id) const;

  // exposed for the scripted reference traces in tests
  void split(int user);
  void merge();

 private:
  bool cluster_checked(const Cluster& c) const;
  void begin_round();

  RsclumbOptions options_;
  std::string name_;
  ConfidenceParams params_;
  double beta_ = 0.0;
  double eps_ = 0.0;
  std::vector<RidgeState> users_;
  std::vector<Vec> theta_hat_;
  std::vector<char> checked_;
  std::map<int, Cluster> clusters_;
  std::vector<int> assignment_;
  int next_cluster_id_ = 0;
  long tau_ = 0;    // completed rounds
  long phase_ = 0;  // current phase s
};

inline RsclumbPolicy make_sclub_policy() {
  RsclumbOptions opt;
  opt.robust = false;
  return RsclumbPolicy(opt, "sclub");
}

}  // namespace cbsim
