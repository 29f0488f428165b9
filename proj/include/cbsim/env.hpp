#pragma once

#include <utility>
#include <vector>

#include "cbsim/rng.hpp"
#include "cbsim/types.hpp"

namespace cbsim {

/// A bandit environment: serves users, exposes candidate arms, realizes
/// rewards and knows the per-round optimum for regret accounting.
/// Immutable after construction; safe to share read-only across trials.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int user_count() const = 0;
  virtual int dim() const = 0;
  virtual int pool_size() const = 0;
  virtual const Vec& arm_feature(int arm) const = 0;

  /// (served user, candidate arm indices).
  virtual std::pair<int, std::vector<int>> sample_round(Rng& rng) const = 0;
  virtual double realize_reward(int user, int arm, Rng& rng) const = 0;
  /// Noise-free reward including the deviation term; the regret oracle.
  virtual double expected_reward(int user, int arm) const = 0;

  double instantaneous_regret(int user, const std::vector<int>& candidates,
                              int chosen) const;
};

}  // namespace cbsim
