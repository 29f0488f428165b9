#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cbsim/env.hpp"

namespace cbsim {

struct SyntheticConfig {
  int u = 100;
  int m = 5;
  int d = 10;
  int pool_size = 1000;
  int per_round_arms = 20;
  double eps_range = 0.2;
  double noise_std = 0.1;
  std::optional<double> min_cluster_gap;
  std::uint64_t seed = 1;

  void validate() const;
};

struct InstanceDiagnostics {
  double gamma = 0.0;        // min pairwise cluster gap
  double gamma1 = 0.0;       // min gap among gaps > zeta (inf if none)
  double zeta_value = 0.0;
  long u_tilde = 0;          // users in clusters zeta-close to another cluster
};

/// Ground-truth problem: cluster preference vectors, user assignment,
/// arm pool and the static per-(user, arm) deviation matrix.
struct ProblemInstance {
  std::vector<Vec> cluster_thetas;  // m unit vectors
  std::vector<int> user_cluster;    // u entries
  std::vector<Vec> arm_pool;        // pool_size unit vectors
  Mat deviation;                    // u x pool_size, entries in (-eps_range, eps_range)
  double eps_range = 0.0;

  int user_count() const { return static_cast<int>(user_cluster.size()); }
  int cluster_count() const { return static_cast<int>(cluster_thetas.size()); }
  int dim() const { return cluster_thetas.empty() ? 0 : static_cast<int>(cluster_thetas[0].size()); }
  const Vec& user_theta(int i) const { return cluster_thetas[user_cluster[i]]; }
};

ProblemInstance generate_instance(const SyntheticConfig& config);

InstanceDiagnostics instance_diagnostics(const ProblemInstance& instance,
                                         double eps_star, double tlx);

/// Flat columnar text export (thetas / assignments / pool / deviation),
/// exact decimal round-trip at 17 significant digits.
void export_instance(const ProblemInstance& instance, std::ostream& out);
ProblemInstance import_instance(std::istream& in);

class SyntheticEnvironment : public Environment {
 public:
  SyntheticEnvironment(ProblemInstance instance, int per_round_arms,
                       double noise_std);

  int user_count() const override { return instance_.user_count(); }
  int dim() const override { return instance_.dim(); }
  int pool_size() const override { return static_cast<int>(instance_.arm_pool.size()); }
  const Vec& arm_feature(int arm) const override { return instance_.arm_pool[arm]; }

  std::pair<int, std::vector<int>> sample_round(Rng& rng) const override;
  double realize_reward(int user, int arm, Rng& rng) const override;
  double expected_reward(int user, int arm) const override;

  const ProblemInstance& instance() const { return instance_; }

 private:
  ProblemInstance instance_;
  int per_round_arms_;
  double noise_std_;
};

/// Samples k distinct indices from [0, n) without replacement
/// (partial Fisher-Yates; order is part of the draw).
std::vector<int> sample_distinct(int n, int k, Rng& rng);

}  // namespace cbsim
