#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cbsim/ridge.hpp"
#include "cbsim/types.hpp"

namespace cbsim {

/// Common policy interface: choose an arm for the served user, then get
/// the realized reward back. Policies are confined to a single trial.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void init(int user_count, int dim, const ConfidenceParams& params) = 0;
  virtual int choose(int user, const std::vector<Vec>& arms) = 0;
  virtual void feedback(int user, const Vec& arm, double reward) = 0;
  virtual std::string name() const = 0;

  /// Entry point used by the harness; carries pool indices alongside the
  /// features so ground-truth (oracle) policies can look rewards up.
  virtual int choose_indexed(int user, const std::vector<Vec>& arms,
                             const std::vector<int>& /*arm_ids*/) {
    return choose(user, arms);
  }
};

/// Lowest-index argmax over UCB indices; the shared tie-break rule.
int argmax_lowest(const std::vector<double>& values);

}  // namespace cbsim
