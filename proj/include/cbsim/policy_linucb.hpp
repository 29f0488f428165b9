#pragma once

#include <string>
#include <vector>

#include "cbsim/policy.hpp"

namespace cbsim {

enum class LinUcbScope { Global, PerUser };

/// LinUCB with either one pooled estimator for all users or one per
/// user; robust=true adds the eps_star history-sum inflation to the
/// index, giving RLinUCB / RLinUCB-Ind.
class LinUcbPolicy : public Policy {
 public:
  LinUcbPolicy(LinUcbScope scope, bool robust, std::string name,
               bool exact_ucb_sum = true)
      : scope_(scope), robust_(robust), exact_ucb_sum_(exact_ucb_sum),
        name_(std::move(name)) {}

  void init(int user_count, int dim, const ConfidenceParams& params) override;
  int choose(int user, const std::vector<Vec>& arms) override;
  void feedback(int user, const Vec& arm, double reward) override;
  std::string name() const override { return name_; }

  const IncrementalRidge& estimator(int user) const {
    return states_[scope_ == LinUcbScope::Global ? 0 : user];
  }

 private:
  LinUcbScope scope_;
  bool robust_;
  bool exact_ucb_sum_;
  std::string name_;
  ConfidenceParams params_;
  double beta_ = 0.0;
  double eps_ = 0.0;
  std::vector<IncrementalRidge> states_;
};

inline LinUcbPolicy make_linucb_one() {
  return LinUcbPolicy(LinUcbScope::Global, false, "linucb_one");
}
inline LinUcbPolicy make_linucb_ind() {
  return LinUcbPolicy(LinUcbScope::PerUser, false, "linucb_ind");
}
inline LinUcbPolicy make_rlinucb_one() {
  return LinUcbPolicy(LinUcbScope::Global, true, "rlinucb_one");
}
inline LinUcbPolicy make_rlinucb_ind() {
  return LinUcbPolicy(LinUcbScope::PerUser, true, "rlinucb_ind");
}

}  // namespace cbsim
