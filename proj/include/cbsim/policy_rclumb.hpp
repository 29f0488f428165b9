#pragma once

#include <string>
#include <vector>

#include "cbsim/graph.hpp"
#include "cbsim/policy.hpp"

namespace cbsim {

struct RclumbOptions {
  bool component_mode = false;  // CLUB-style connected-component clusters
  bool robust = true;           // eps_star inflation + alpha2 deletion term
  bool exact_ucb_sum = true;    // exact history sum vs sqrt(T) surrogate
  bool record_clusters = false; // keep per-round (user, cluster) trace
};

/// Graph-based clustering policy: 1-hop cluster extraction, enlarged UCB
/// and misspecification-aware edge deletion. With component_mode and
/// robust=false this is exactly the CLUB baseline.
class RclumbPolicy : public Policy {
 public:
  explicit RclumbPolicy(RclumbOptions options = {}, std::string name = "rclumb")
      : options_(options), name_(std::move(name)) {}

  void init(int user_count, int dim, const ConfidenceParams& params) override;
  int choose(int user, const std::vector<Vec>& arms) override;
  void feedback(int user, const Vec& arm, double reward) override;
  std::string name() const override { return name_; }

  const UserGraph& graph() const { return *graph_; }
  const RidgeState& user_state(int i) const { return users_[i]; }
  const Vec& user_estimate(int i) const { return theta_hat_[i]; }

  struct RoundCluster {
    int user;
    std::vector<int> members;
  };
  const std::vector<RoundCluster>& cluster_trace() const { return trace_; }

 private:
  std::vector<int> extract_cluster(int user) const;
  void delete_edges(int user);

  RclumbOptions options_;
  std::string name_;
  ConfidenceParams params_;
  double beta_ = 0.0;
  double eps_ = 0.0;
  std::unique_ptr<UserGraph> graph_;
  std::vector<RidgeState> users_;
  std::vector<Vec> theta_hat_;
  long round_ = 0;
  std::vector<RoundCluster> trace_;
};

inline RclumbPolicy make_club_policy() {
  RclumbOptions opt;
  opt.component_mode = true;
  opt.robust = false;
  return RclumbPolicy(opt, "club");
}

}  // namespace cbsim
